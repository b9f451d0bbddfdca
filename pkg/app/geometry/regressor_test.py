import unittest

import numpy as np

from geometry import box
from geometry import regressor


def make_exact_linear_data(seed, m=40, d=6):
    """Builds samples whose offsets are an exact linear map of the features."""
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(m, d))
    true_weights = rng.normal(scale=0.05, size=(d, 4))
    boxes = np.concatenate(
        [rng.uniform(10, 90, (m, 2)),
         rng.uniform(10, 40, (m, 2))], axis=1)
    gts = regressor.decode_offsets(boxes, features @ true_weights)
    return features, boxes, gts, true_weights


class RegressorFitTest(unittest.TestCase):

    def test_identical_boxes_give_zero_offsets(self):
        rng = np.random.default_rng(0)
        features = rng.normal(size=(30, 5))
        boxes = [box.BoundingBox(10 + i, 20, 30, 40) for i in range(30)]
        params = regressor.regressor_fit(features, boxes, boxes, 1.0)
        for feature, b in zip(features, boxes):
            refined = regressor.regressor_apply(params, feature, b)
            np.testing.assert_allclose(b.as_array(),
                                       refined.as_array(),
                                       atol=1e-6)

    def test_recovers_generating_weights_without_penalty(self):
        features, boxes, gts, true_weights = make_exact_linear_data(seed=1)
        params = regressor.regressor_fit(features, boxes, gts, 0.0)
        # Closed-form least squares on centered data, computed independently.
        targets = regressor.encode_offsets(boxes, gts)
        expected, *_ = np.linalg.lstsq(features - features.mean(axis=0),
                                       targets - targets.mean(axis=0),
                                       rcond=None)
        np.testing.assert_allclose(expected, params.weights, atol=1e-6)
        np.testing.assert_allclose(true_weights, params.weights, atol=1e-6)

    def test_large_penalty_drives_weights_to_zero(self):
        features, boxes, gts, _ = make_exact_linear_data(seed=2)
        params = regressor.regressor_fit(features, boxes, gts, 1e12)
        self.assertLess(np.abs(params.weights).max(), 1e-8)

    def test_dual_and_primal_solutions_agree(self):
        rng = np.random.default_rng(3)
        features = rng.normal(size=(8, 20))
        boxes = np.tile([10.0, 10.0, 20.0, 20.0], (8, 1))
        gts = boxes + rng.normal(scale=1.0, size=(8, 4))
        params = regressor.regressor_fit(features, boxes, gts, 0.5)
        targets = regressor.encode_offsets(boxes, gts)
        targets = targets - targets.mean(axis=0)
        centered = features - features.mean(axis=0)
        primal = np.linalg.solve(centered.T @ centered + 0.5 * np.eye(20),
                                 centered.T @ targets)
        np.testing.assert_allclose(primal, params.weights, atol=1e-9)

    def test_constant_offset_is_learned_despite_a_large_penalty(self):
        rng = np.random.default_rng(6)
        # Positive features with a large mean, like ReLU activations.
        features = rng.uniform(5.0, 10.0, size=(200, 12))
        boxes = np.concatenate(
            [rng.uniform(20, 60, (200, 2)),
             rng.uniform(20, 40, (200, 2))], axis=1)
        shift = np.array([0.1, -0.05, 0.08, -0.04])
        gts = regressor.decode_offsets(boxes, np.tile(shift, (200, 1)))
        params = regressor.regressor_fit(features, boxes, gts, 1000.0)
        refined = regressor.regressor_apply_array(params, features, boxes)
        np.testing.assert_allclose(gts, refined, atol=1e-6)

    def test_singular_system_without_penalty_raises(self):
        features = np.ones((10, 3))
        boxes = [box.BoundingBox(0, 0, 10, 10)] * 10
        with self.assertRaises(regressor.SingularSystemError):
            regressor.regressor_fit(features, boxes, boxes, 0.0)

    def test_length_mismatch_raises(self):
        with self.assertRaises(regressor.DimensionMismatchError):
            regressor.regressor_fit(np.ones((3, 2)),
                                    [box.BoundingBox(0, 0, 1, 1)] * 2,
                                    [box.BoundingBox(0, 0, 1, 1)] * 3, 1.0)


class RegressorApplyTest(unittest.TestCase):

    def test_zero_weights_return_input_box(self):
        params = regressor.RegressorParams(weights=np.zeros((4, 4)),
                                           ridge_lambda=1.0)
        b = box.BoundingBox(12.5, 7.25, 30, 18)
        self.assertEqual(b, regressor.regressor_apply(params, np.ones(4), b))

    def test_fit_then_apply_reproduces_training_gt(self):
        features, boxes, gts, _ = make_exact_linear_data(seed=4)
        params = regressor.regressor_fit(features, boxes, gts, 0.0)
        for feature, b, gt in zip(features, boxes, gts):
            refined = regressor.regressor_apply(params, feature,
                                                box.from_array(b))
            np.testing.assert_allclose(gt, refined.as_array(), atol=1e-4)

    def test_decoded_sizes_are_always_positive(self):
        rng = np.random.default_rng(5)
        params = regressor.RegressorParams(weights=rng.normal(scale=10,
                                                              size=(3, 4)),
                                           ridge_lambda=0.0)
        for _ in range(1000):
            b = box.BoundingBox(*rng.uniform(-100, 100, 2), *rng.uniform(
                0.5, 100, 2))
            refined = regressor.regressor_apply(params,
                                                rng.normal(scale=5, size=3), b)
            self.assertGreater(refined.w, 0)
            self.assertGreater(refined.h, 0)

    def test_dimension_mismatch_raises(self):
        params = regressor.RegressorParams(weights=np.zeros((4, 4)),
                                           ridge_lambda=1.0)
        with self.assertRaises(regressor.DimensionMismatchError):
            regressor.regressor_apply(params, np.ones(5),
                                      box.BoundingBox(0, 0, 1, 1))
