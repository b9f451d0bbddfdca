import os
import tempfile
import unittest

from dataset import attributes


class AttributesTest(unittest.TestCase):

    def test_there_are_twelve_evaluation_attributes(self):
        self.assertEqual(12, len(attributes.EvalAttributeId))

    def test_parse_is_case_insensitive(self):
        self.assertEqual(attributes.EvalAttributeId.PARTIAL_OCCLUSION,
                         attributes.parse(' po '))

    def test_unknown_code_raises(self):
        with self.assertRaises(attributes.UnknownAttributeError):
            attributes.parse('XX')

    def test_parse_codes_accepts_commas_and_whitespace(self):
        self.assertEqual(
            frozenset([
                attributes.EvalAttributeId.BACKGROUND_CLUTTER,
                attributes.EvalAttributeId.FAST_MOTION,
                attributes.EvalAttributeId.THERMAL_CROSSOVER,
            ]), attributes.parse_codes('BC, FM\nTC\n'))

    def test_format_codes_is_sorted(self):
        self.assertEqual(
            'FM,LI',
            attributes.format_codes([
                attributes.EvalAttributeId.LOW_ILLUMINATION,
                attributes.EvalAttributeId.FAST_MOTION
            ]))

    def test_every_branch_maps_to_evaluation_flags(self):
        self.assertEqual({'TC', 'IV', 'SV', 'OCC', 'FM'},
                         set(attributes.BRANCH_FLAGS))
        self.assertEqual(
            {'PO', 'HO'},
            {str(flag) for flag in attributes.BRANCH_FLAGS['OCC']})


class ReadSequenceAttributesTest(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()

    def write(self, filename, text):
        with open(os.path.join(self.temp_dir.name, filename),
                  'w',
                  encoding='utf-8') as f:
            f.write(text)

    def test_no_files_means_no_flags(self):
        self.assertEqual((frozenset(), {}),
                         attributes.read_sequence_attributes(
                             self.temp_dir.name))

    def test_listing_file_and_tag_files_are_combined(self):
        self.write('attributes.txt', 'SV\n')
        self.write('HO.tag', '0\n1\n1\n')
        self.write('LI.tag', '0\n0\n0\n')
        flags, frame_flags = attributes.read_sequence_attributes(
            self.temp_dir.name)
        self.assertEqual(
            frozenset([
                attributes.EvalAttributeId.SCALE_VARIATION,
                attributes.EvalAttributeId.HEAVY_OCCLUSION
            ]), flags)
        self.assertEqual([False, True, True],
                         frame_flags[attributes.EvalAttributeId.HEAVY_OCCLUSION])
        self.assertEqual([False, False, False], frame_flags[
            attributes.EvalAttributeId.LOW_ILLUMINATION])

    def test_unknown_tag_file_is_ignored(self):
        self.write('XYZ.tag', '1\n')
        flags, _ = attributes.read_sequence_attributes(self.temp_dir.name)
        self.assertEqual(frozenset(), flags)

    def test_write_then_read(self):
        flags = frozenset([
            attributes.EvalAttributeId.MOTION_BLUR,
            attributes.EvalAttributeId.CAMERA_MOVING
        ])
        attributes.write_attributes(self.temp_dir.name, flags)
        self.assertEqual(
            flags,
            attributes.read_sequence_attributes(self.temp_dir.name)[0])
