import dataclasses
import unittest

import numpy as np

from dataset import synth
from geometry import box
from geometry import regressor
from model import architecture
from model import network
from tracker import config
from tracker import tracker
from training import checkpoint

_SPEC = architecture.NetworkSpec(widths=(8, 16, 32), fc_width=64)

_FAST = config.TrackerConfig(n_neg_init=1000, init_iterations=30, n_reg=300)


def _model(spec=_SPEC, seed=0):
    return checkpoint.from_network(network.EANet(spec, domains=1, seed=seed),
                                   include_domains=False)


def _sequence(**kwargs):
    return synth.synth_sequence(synth.SynthSpec(**kwargs))


def _is_fc(name):
    return name.startswith(network.FC_PREFIXES)


class TopCandidatesTest(unittest.TestCase):

    def test_single_best_candidate(self):
        self.assertEqual((1, (1,)), tracker.top_candidates([0.1, 0.9, 0.5], 1))

    def test_ties_go_to_the_lower_index(self):
        argmax, top = tracker.top_candidates([0.5, 0.9, 0.9, 0.1], 3)
        self.assertEqual(1, argmax)
        self.assertEqual((1, 2, 0), top)


class InitTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.sequence = _sequence(name='init', frames=2)
        cls.gt = cls.sequence.gt_box(0)
        cls.state = tracker.init(cls.sequence.frame(0), cls.gt, _model(),
                                 _FAST)

    def test_starts_on_the_given_box(self):
        self.assertEqual(self.gt, self.state.current_box)
        self.assertEqual(1, self.state.t)

    def test_scores_target_above_background(self):
        frame = self.sequence.frame(0)
        background = box.BoundingBox(120, 5, self.gt.w, self.gt.h)
        self.assertEqual(0.0, box.iou(background, self.gt))
        features = tracker.extract_features(
            self.state.net, frame, np.stack([self.gt.as_array(),
                                             background.as_array()]))
        scores = tracker.positive_scores(self.state.net, features)
        self.assertGreater(float(scores[0]), float(scores[1]))

    def test_regressor_keeps_the_ground_truth_within_one_pixel(self):
        features = tracker.extract_features(self.state.net,
                                            self.sequence.frame(0),
                                            self.gt.as_array())
        refined = regressor.regressor_apply(
            self.state.regressor, features[0].double().numpy(), self.gt)
        np.testing.assert_allclose(self.gt.as_array(),
                                   refined.as_array(),
                                   atol=1.0)

    def test_seeds_the_memory_with_the_first_frame(self):
        self.assertEqual([0], self.state.memory.positive_frames())
        self.assertEqual([0], self.state.memory.negative_frames())

    def test_rejects_degenerate_targets(self):
        with self.assertRaises(tracker.DegenerateTargetError):
            tracker.init(self.sequence.frame(0), box.BoundingBox(10, 10, 1, 20),
                         _model(), _FAST)

    def test_rejects_targets_outside_the_frame(self):
        with self.assertRaises(tracker.TargetOutsideFrameError):
            tracker.init(self.sequence.frame(0),
                         box.BoundingBox(500, 10, 20, 20), _model(), _FAST)


class SyntheticTrackingTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.sequence = _sequence(name='linear', frames=20, velocity=(2, 1))
        cls.result = tracker.track_sequence(cls.sequence, _model(),
                                            config.TrackerConfig())

    def test_follows_the_target_on_every_frame(self):
        ratios = box.overlap_ratios(self.result.boxes,
                                    self.sequence.ground_truth)
        self.assertEqual(20, len(ratios))
        self.assertTrue(np.all(ratios >= 0.5), ratios)
        self.assertGreaterEqual(ratios.mean(), 0.6)

    def test_argmax_is_the_best_scoring_candidate(self):
        self.assertEqual(19, len(self.result.records))
        for record in self.result.records:
            with self.subTest(frame=record.index):
                self.assertEqual(256, len(record.scores))
                best = max(range(len(record.scores)),
                           key=lambda i, s=record.scores: s[i])
                self.assertEqual(best, record.argmax_index)
                self.assertEqual(best, record.top_indices[0])
                self.assertEqual(5, len(record.top_indices))


class FrozenParametersTest(unittest.TestCase):

    def test_only_fc_layers_change_over_fifty_frames(self):
        spec = architecture.NetworkSpec(widths=(4, 6, 8), fc_width=16)
        model = _model(spec)
        sequence = _sequence(name='long', frames=50)
        state = tracker.init(sequence.frame(0), sequence.gt_box(0), model,
                             _FAST)
        for index in range(1, len(sequence)):
            tracker.step(state, sequence.frame(index))
        after = checkpoint.from_network(state.net).arrays
        for name, array in model.arrays.items():
            if _is_fc(name):
                continue
            np.testing.assert_array_equal(array, after[name], err_msg=name)
        self.assertFalse(
            np.array_equal(model.arrays['head.fc4.weight'],
                           after['head.fc4.weight']))
        # Frame 10 runs either a long update or a failure update.
        self.assertIsNotNone(state.records[9].update)


class DeterminismTest(unittest.TestCase):

    def test_same_seed_gives_the_same_trajectory(self):
        spec = architecture.NetworkSpec(widths=(4, 6, 8), fc_width=16)
        sequence = _sequence(name='twice', frames=6)
        first = tracker.track_sequence(sequence, _model(spec), _FAST)
        second = tracker.track_sequence(sequence, _model(spec), _FAST)
        np.testing.assert_array_equal(first.boxes, second.boxes)
        self.assertEqual([r.score for r in first.records],
                         [r.score for r in second.records])


class UpdateTest(unittest.TestCase):

    def setUp(self):
        self.spec = architecture.NetworkSpec(widths=(4, 6, 8), fc_width=16)
        self.sequence = _sequence(name='update', frames=4)

    def test_failures_trigger_short_updates_and_widen_the_search(self):
        failing = dataclasses.replace(_FAST, success_threshold=1e9)
        state = tracker.init(self.sequence.frame(0), self.sequence.gt_box(0),
                             _model(self.spec), failing)
        for index in range(1, 4):
            tracker.step(state, self.sequence.frame(index))
        self.assertEqual(3, state.failures)
        self.assertTrue(all(not r.success for r in state.records))
        self.assertEqual([tracker.UpdateKind.SHORT] * 3,
                         [r.update for r in state.records])
        # Failed frames contribute no samples.
        self.assertEqual([0], state.memory.positive_frames())

    def test_successful_frames_add_samples(self):
        passing = dataclasses.replace(_FAST, success_threshold=-1e9)
        state = tracker.init(self.sequence.frame(0), self.sequence.gt_box(0),
                             _model(self.spec), passing)
        for index in range(1, 4):
            tracker.step(state, self.sequence.frame(index))
        self.assertEqual(0, state.failures)
        self.assertEqual([0, 1, 2, 3], state.memory.positive_frames())
        self.assertEqual(4, state.t)

    def test_updates_leave_non_fc_parameters_alone(self):
        model = _model(self.spec)
        state = tracker.init(self.sequence.frame(0), self.sequence.gt_box(0),
                             model, _FAST)
        for kind in tracker.UpdateKind:
            tracker.update(state, kind)
        after = checkpoint.from_network(state.net).arrays
        for name, array in model.arrays.items():
            if not _is_fc(name):
                np.testing.assert_array_equal(array, after[name],
                                              err_msg=name)

    def test_occlusion_triggers_a_short_update(self):
        sequence = _sequence(name='occluded',
                             frames=10,
                             occlusion=(4, 6),
                             occlusion_fraction=1.0)
        result = tracker.track_sequence(sequence, _model(), _FAST)
        self.assertTrue(
            any(r.update == tracker.UpdateKind.SHORT for r in result.records))
