"""Axis-aligned bounding boxes in (x, y, w, h) pixel format.

The anchor is the top-left corner, which is how the GTOT, RGBT234 and LasHeR
annotation files express their boxes once parsed.
"""
import dataclasses
import math

import numpy as np


class Error(Exception):
    pass


class InvalidBoxError(Error):
    pass


@dataclasses.dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        values = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in values):
            raise InvalidBoxError(f'Box coordinates must be finite: {values}')
        if self.w <= 0 or self.h <= 0:
            raise InvalidBoxError(
                f'Box width and height must be positive: {values}')

    @property
    def center(self):
        return self.x + self.w / 2.0, self.y + self.h / 2.0

    @property
    def area(self):
        return self.w * self.h

    def as_array(self):
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)

    def clipped(self, image_bounds):
        """Returns the box clipped so that it lies inside the image.

        The box keeps at least a 1x1 pixel footprint, so a box that lies
        entirely outside the image collapses onto the nearest border pixel.

        Args:
            image_bounds: A tuple (width, height) of the image in pixels.

        Returns:
            A new BoundingBox.
        """
        return from_array(clip_array(self.as_array()[np.newaxis],
                                     image_bounds)[0])


def from_array(values):
    return BoundingBox(*(float(v) for v in values))


def to_array(boxes):
    """Stacks a list of boxes into an (N, 4) float64 array."""
    if not boxes:
        return np.zeros((0, 4), dtype=np.float64)
    return np.stack([b.as_array() for b in boxes])


def corners_to_xywh(values):
    """(x1, y1, x2, y2) -> (x, y, w, h) array; degenerate boxes pass through."""
    x1, y1, x2, y2 = np.asarray(values, dtype=np.float64)
    return np.array([x1, y1, x2 - x1, y2 - y1])


def polygon_to_xywh(values):
    """The enclosing (x, y, w, h) of an 8-value polygon, as an array."""
    values = np.asarray(values, dtype=np.float64)
    xs, ys = values[0::2], values[1::2]
    return corners_to_xywh([xs.min(), ys.min(), xs.max(), ys.max()])


def from_corners(x1, y1, x2, y2):
    return from_array(corners_to_xywh([x1, y1, x2, y2]))


def from_polygon(values):
    """Converts an 8-value polygon annotation to its enclosing box."""
    return from_array(polygon_to_xywh(values))


def clip_array(boxes, image_bounds):
    """Clips an (N, 4) array of boxes to the image, keeping w, h >= 1."""
    width, height = image_bounds
    boxes = np.array(boxes, dtype=np.float64, copy=True)
    boxes[:, 2] = np.clip(boxes[:, 2], 1.0, width)
    boxes[:, 3] = np.clip(boxes[:, 3], 1.0, height)
    boxes[:, 0] = np.clip(boxes[:, 0], 0.0, width - boxes[:, 2])
    boxes[:, 1] = np.clip(boxes[:, 1], 0.0, height - boxes[:, 3])
    return boxes


def overlap_ratios(boxes, reference):
    """Computes the IoU of every row in `boxes` against `reference`.

    Args:
        boxes: An (N, 4) array of (x, y, w, h) rows.
        reference: Either a (4,) array, or an (N, 4) array compared row-wise.

    Returns:
        An (N,) float64 array of values in [0, 1].
    """
    boxes = np.asarray(boxes, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    left = np.maximum(boxes[..., 0], reference[..., 0])
    top = np.maximum(boxes[..., 1], reference[..., 1])
    right = np.minimum(boxes[..., 0] + boxes[..., 2],
                       reference[..., 0] + reference[..., 2])
    bottom = np.minimum(boxes[..., 1] + boxes[..., 3],
                        reference[..., 1] + reference[..., 3])
    intersection = np.clip(right - left, 0, None) * np.clip(
        bottom - top, 0, None)
    union = (boxes[..., 2] * boxes[..., 3] +
             reference[..., 2] * reference[..., 3] - intersection)
    ratios = np.clip(intersection / union, 0.0, 1.0)
    # Exact duplicates are reported as 1 regardless of float rounding.
    return np.where(np.all(boxes == reference, axis=-1), 1.0, ratios)


def center_distances(boxes, reference):
    """Euclidean distances between box centers, row-wise or against one box."""
    boxes = np.asarray(boxes, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    dx = (boxes[..., 0] + boxes[..., 2] / 2.0) - (reference[..., 0] +
                                                  reference[..., 2] / 2.0)
    dy = (boxes[..., 1] + boxes[..., 3] / 2.0) - (reference[..., 1] +
                                                  reference[..., 3] / 2.0)
    return np.hypot(dx, dy)


def iou(a, b):
    """Intersection over union of two boxes, in [0, 1]."""
    return float(overlap_ratios(a.as_array(), b.as_array()))


def center_distance(a, b):
    """Distance in pixels between the centers of two boxes."""
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)
