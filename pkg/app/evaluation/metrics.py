"""One-pass evaluation metrics: precision rate (PR) and success rate (SR).

PR(θ) is the fraction of frames whose predicted box center lies within θ
pixels of the ground-truth center. SR(τ) is the fraction of frames whose IoU
exceeds τ; the SR score is the mean of SR over the threshold grid (area under
the curve). Frames without ground truth (all-zero rows) count for neither.
"""
import dataclasses

import numpy as np

from dataset import annotations
from geometry import box as box_lib

# Center-distance thresholds in pixels.
PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
# IoU thresholds.
SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 21)
# The threshold at which the PR score is reported.
PRECISION_SCORE_THRESHOLD = 20.0


class Error(Exception):
    pass


class LengthMismatchError(Error):
    pass


class NoValidFramesError(Error):
    pass


class InvalidCurveError(Error):
    pass


@dataclasses.dataclass(frozen=True, eq=False)
class EvalCurve:
    thresholds: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        if self.thresholds.shape != self.rates.shape:
            raise InvalidCurveError(
                'Thresholds and rates must have the same length.')
        if np.any(np.diff(self.thresholds) <= 0):
            raise InvalidCurveError('Thresholds must be ascending.')
        if np.any((self.rates < 0) | (self.rates > 1)):
            raise InvalidCurveError('Rates must lie in [0, 1].')

    def rate_at(self, threshold):
        matches = np.flatnonzero(np.isclose(self.thresholds, threshold))
        if not len(matches):
            raise InvalidCurveError(f'No threshold {threshold} on the curve.')
        return float(self.rates[matches[0]])

    def __eq__(self, other):
        return (isinstance(other, EvalCurve) and
                np.array_equal(self.thresholds, other.thresholds) and
                np.array_equal(self.rates, other.rates))


def valid_frames(gt):
    """Mask of the frames that carry ground truth."""
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    return annotations.is_annotated(gt)


def frame_errors(pred, gt):
    """Per-frame (center distance, IoU) over the frames with ground truth.

    Raises:
        LengthMismatchError: If `pred` and `gt` differ in length.
    """
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 4)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    if len(pred) != len(gt):
        raise LengthMismatchError(
            f'Got {len(pred)} predictions for {len(gt)} ground-truth boxes.')
    mask = valid_frames(gt)
    pred, gt = pred[mask], gt[mask]
    return box_lib.center_distances(pred, gt), box_lib.overlap_ratios(pred, gt)


def precision_rates(distances, thresholds=PRECISION_THRESHOLDS):
    distances = np.asarray(distances, dtype=np.float64)
    if not len(distances):
        raise NoValidFramesError('No frame with ground truth to evaluate.')
    return (distances[np.newaxis, :] <=
            np.asarray(thresholds)[:, np.newaxis]).mean(axis=1)


def success_rates(overlaps, thresholds=SUCCESS_THRESHOLDS):
    overlaps = np.asarray(overlaps, dtype=np.float64)
    if not len(overlaps):
        raise NoValidFramesError('No frame with ground truth to evaluate.')
    return (overlaps[np.newaxis, :] >
            np.asarray(thresholds)[:, np.newaxis]).mean(axis=1)


def precision_curve(pred, gt, thresholds=PRECISION_THRESHOLDS):
    distances, _ = frame_errors(pred, gt)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    return EvalCurve(thresholds, precision_rates(distances, thresholds))


def success_curve(pred, gt, thresholds=SUCCESS_THRESHOLDS):
    """Returns (EvalCurve, SR score)."""
    _, overlaps = frame_errors(pred, gt)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    curve = EvalCurve(thresholds, success_rates(overlaps, thresholds))
    return curve, auc(curve)


def auc(curve):
    """Discrete area under a success curve: the mean rate."""
    return float(np.mean(curve.rates))


def precision_score(curve, threshold=PRECISION_SCORE_THRESHOLD):
    return curve.rate_at(threshold)
