import unittest

import numpy as np

from geometry import box


class BoundingBoxTest(unittest.TestCase):

    def test_rejects_non_positive_size(self):
        with self.assertRaises(box.InvalidBoxError):
            box.BoundingBox(0, 0, 0, 10)
        with self.assertRaises(box.InvalidBoxError):
            box.BoundingBox(0, 0, 10, -1)

    def test_rejects_non_finite_coordinates(self):
        for values in [(float('nan'), 0, 1, 1), (0, float('inf'), 1, 1)]:
            with self.subTest(values):
                with self.assertRaises(box.InvalidBoxError):
                    box.BoundingBox(*values)

    def test_clipped_keeps_box_inside_image(self):
        clipped = box.BoundingBox(-5, 90, 20, 20).clipped((100, 100))
        self.assertEqual(box.BoundingBox(0, 80, 20, 20), clipped)

    def test_from_polygon_returns_enclosing_box(self):
        self.assertEqual(box.BoundingBox(1, 2, 9, 8),
                         box.from_polygon([1, 2, 10, 2, 10, 10, 1, 10]))

    def test_from_corners(self):
        self.assertEqual(box.BoundingBox(24, 30, 26, 30),
                         box.from_corners(24, 30, 50, 60))

    def test_degenerate_corners_convert_without_validation(self):
        np.testing.assert_array_equal([10, 10, 0, 0],
                                      box.corners_to_xywh([10, 10, 10, 10]))
        with self.assertRaises(box.InvalidBoxError):
            box.from_corners(10, 10, 10, 10)


class IouTest(unittest.TestCase):

    def test_identical_boxes(self):
        a = box.BoundingBox(0, 0, 10, 10)
        self.assertEqual(1.0, box.iou(a, a))

    def test_identical_boxes_with_fractional_coordinates(self):
        a = box.BoundingBox(0.1, 0.7, 0.2, 3.3)
        self.assertEqual(1.0, box.iou(a, box.BoundingBox(0.1, 0.7, 0.2, 3.3)))

    def test_disjoint_boxes(self):
        self.assertEqual(
            0.0,
            box.iou(box.BoundingBox(0, 0, 10, 10),
                    box.BoundingBox(20, 20, 5, 5)))

    def test_half_shifted_boxes(self):
        self.assertAlmostEqual(
            1.0 / 3.0,
            box.iou(box.BoundingBox(0, 0, 10, 10),
                    box.BoundingBox(5, 0, 10, 10)))

    def test_symmetric_and_within_unit_interval_for_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            a = box.BoundingBox(*rng.uniform(-50, 50, 2), *rng.uniform(
                1, 60, 2))
            b = box.BoundingBox(*rng.uniform(-50, 50, 2), *rng.uniform(
                1, 60, 2))
            forward = box.iou(a, b)
            self.assertEqual(forward, box.iou(b, a))
            self.assertGreaterEqual(forward, 0.0)
            self.assertLessEqual(forward, 1.0)

    def test_vectorized_overlaps_match_scalar_iou(self):
        rng = np.random.default_rng(1)
        boxes = np.concatenate(
            [rng.uniform(0, 50, (20, 2)),
             rng.uniform(1, 30, (20, 2))], axis=1)
        reference = box.BoundingBox(10, 10, 20, 20)
        ratios = box.overlap_ratios(boxes, reference.as_array())
        for row, ratio in zip(boxes, ratios):
            self.assertAlmostEqual(box.iou(box.from_array(row), reference),
                                   ratio)


class CenterDistanceTest(unittest.TestCase):

    def test_identical_boxes(self):
        a = box.BoundingBox(3, 4, 10, 10)
        self.assertEqual(0.0, box.center_distance(a, a))

    def test_three_four_five_triangle(self):
        self.assertAlmostEqual(
            5.0,
            box.center_distance(box.BoundingBox(0, 0, 10, 10),
                                box.BoundingBox(3, 4, 10, 10)))

    def test_vertical_shift(self):
        self.assertAlmostEqual(
            2.0,
            box.center_distance(box.BoundingBox(0, 0, 2, 2),
                                box.BoundingBox(0, 2, 2, 2)))

    def test_is_symmetric(self):
        a = box.BoundingBox(1, 7, 3, 9)
        b = box.BoundingBox(12, -4, 6, 2)
        self.assertEqual(box.center_distance(a, b), box.center_distance(b, a))

