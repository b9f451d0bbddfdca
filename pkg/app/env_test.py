import os
import tempfile
import unittest

import env


class EnvTest(unittest.TestCase):

    def setUp(self):
        # pylint: disable=consider-using-with
        self.temp_dir = tempfile.TemporaryDirectory()
        self.out_dir = os.path.realpath(self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_accepts_file_in_out_dir(self):
        path = env.abs_path_in_out_dir(self.out_dir, 'report.txt')
        self.assertEqual(os.path.join(self.out_dir, 'report.txt'), path)

    def test_accepts_nested_path_within_out_dir(self):
        path = env.abs_path_in_out_dir(self.out_dir, 'results/EANet')
        self.assertEqual(os.path.join(self.out_dir, 'results', 'EANet'), path)

    def test_accepts_path_traversal_within_out_dir(self):
        path = env.abs_path_in_out_dir(self.out_dir, 'results/../curves')
        self.assertEqual(os.path.join(self.out_dir, 'curves'), path)

    def test_rejects_input_with_leading_slash(self):
        with self.assertRaises(ValueError):
            env.abs_path_in_out_dir(self.out_dir, '/foo')

    def test_rejects_path_traversal_outside_out_dir(self):
        with self.assertRaises(env.PathNotRelativeToOutDirectoryError):
            env.abs_path_in_out_dir(self.out_dir, '../foo')

        with self.assertRaises(env.PathNotRelativeToOutDirectoryError):
            env.abs_path_in_out_dir(self.out_dir, 'foo/../../bar')
