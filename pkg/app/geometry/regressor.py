"""Ridge-regression bounding-box refinement.

The regressor maps a feature vector of a sample box to the offsets that move
the sample onto the ground truth. Offsets use the usual center/log-size
encoding:

    (dx / w, dy / h, log(w_gt / w), log(h_gt / h))

where dx and dy are the differences between the box centers.
"""
import dataclasses
import logging
import math

import numpy as np

from geometry import box as box_lib

logger = logging.getLogger(__name__)

# Decoded log-size offsets are clipped to this magnitude, so a decoded box
# can never collapse to zero or blow up to infinity.
_MAX_LOG_SCALE = math.log(1000.0 / 16.0)


class Error(Exception):
    pass


class SingularSystemError(Error):
    pass


class DimensionMismatchError(Error):
    pass


@dataclasses.dataclass(frozen=True)
class RegressorParams:
    # Shape (feature_dim, 4).
    weights: np.ndarray
    ridge_lambda: float
    # Training means of the features and offsets. The fit is done on centered
    # data, so the intercept is not penalized. None means zero.
    feature_mean: np.ndarray = None
    target_mean: np.ndarray = None

    def __post_init__(self):
        if self.ridge_lambda < 0:
            raise ValueError('ridge_lambda must not be negative.')
        if self.weights.ndim != 2 or self.weights.shape[1] != 4:
            raise DimensionMismatchError(
                f'Expected weights of shape (d, 4), got {self.weights.shape}.')
        if not np.all(np.isfinite(self.weights)):
            raise ValueError('Regressor weights must be finite.')
        if (self.feature_mean is not None and
                self.feature_mean.shape != (self.weights.shape[0],)):
            raise DimensionMismatchError(
                f'Expected a feature mean of length {self.weights.shape[0]}, '
                f'got {self.feature_mean.shape}.')
        if self.target_mean is not None and self.target_mean.shape != (4,):
            raise DimensionMismatchError(
                f'Expected a target mean of length 4, got '
                f'{self.target_mean.shape}.')

    @property
    def feature_dim(self):
        return self.weights.shape[0]


def encode_offsets(boxes, gts):
    """Encodes the (N, 4) targets that move `boxes` onto `gts`."""
    boxes = np.asarray(boxes, dtype=np.float64)
    gts = np.asarray(gts, dtype=np.float64)
    box_centers = boxes[:, :2] + boxes[:, 2:] / 2.0
    gt_centers = gts[:, :2] + gts[:, 2:] / 2.0
    return np.concatenate([
        (gt_centers - box_centers) / boxes[:, 2:],
        np.log(gts[:, 2:] / boxes[:, 2:]),
    ],
                          axis=1)


def decode_offsets(boxes, offsets):
    """Inverse of `encode_offsets`; always yields positive widths/heights."""
    boxes = np.asarray(boxes, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.float64)
    sizes = boxes[:, 2:] * np.exp(
        np.clip(offsets[:, 2:], -_MAX_LOG_SCALE, _MAX_LOG_SCALE))
    sizes = np.maximum(sizes, np.finfo(np.float64).tiny)
    # Written relative to the top-left corner, so zero offsets reproduce the
    # input box exactly.
    corners = (boxes[:, :2] + offsets[:, :2] * boxes[:, 2:] +
               (boxes[:, 2:] - sizes) / 2.0)
    return np.concatenate([corners, sizes], axis=1)


def regressor_fit(features, boxes, gts, ridge_lambda):
    """Fits the ridge regressor in closed form.

    Args:
        features: An (m, d) array, one row per sample box.
        boxes: The m sample BoundingBoxes (or an (m, 4) array).
        gts: The m ground-truth BoundingBoxes (or an (m, 4) array).
        ridge_lambda: Non-negative ridge penalty.

    Returns:
        A RegressorParams.

    Raises:
        DimensionMismatchError: If the inputs disagree in length.
        SingularSystemError: If ridge_lambda is zero and the features do not
            have full column rank.
    """
    features = np.asarray(features, dtype=np.float64)
    boxes = _as_box_array(boxes)
    gts = _as_box_array(gts)
    if features.ndim != 2 or features.shape[0] < 1:
        raise DimensionMismatchError('Expected a non-empty (m, d) matrix.')
    if not features.shape[0] == len(boxes) == len(gts):
        raise DimensionMismatchError(
            f'Got {features.shape[0]} feature rows, {len(boxes)} boxes and '
            f'{len(gts)} ground truths.')
    if ridge_lambda < 0:
        raise ValueError('ridge_lambda must not be negative.')
    targets = encode_offsets(boxes, gts)
    feature_mean = features.mean(axis=0)
    target_mean = targets.mean(axis=0)
    features = features - feature_mean
    targets = targets - target_mean
    m, d = features.shape
    if ridge_lambda == 0:
        if np.linalg.matrix_rank(features) < d:
            raise SingularSystemError(
                'Normal matrix is singular; use a positive ridge_lambda.')
        weights = np.linalg.solve(features.T @ features, features.T @ targets)
    elif d > m:
        # Dual form, same solution, cheaper when there are fewer samples than
        # feature dimensions.
        gram = features @ features.T + ridge_lambda * np.eye(m)
        weights = features.T @ np.linalg.solve(gram, targets)
    else:
        normal = features.T @ features + ridge_lambda * np.eye(d)
        weights = np.linalg.solve(normal, features.T @ targets)
    logger.debug('Fitted box regressor on %d samples of dimension %d', m, d)
    return RegressorParams(weights=weights,
                           ridge_lambda=float(ridge_lambda),
                           feature_mean=feature_mean,
                           target_mean=target_mean)


def predict_offsets(params, features):
    """The (N, 4) offsets predicted for an (N, d) feature array."""
    if params.feature_mean is not None:
        features = features - params.feature_mean
    offsets = features @ params.weights
    if params.target_mean is not None:
        offsets = offsets + params.target_mean
    return offsets


def regressor_apply_array(params, features, boxes):
    """Refines an (N, 4) array of boxes given their (N, d) features."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    boxes = np.atleast_2d(np.asarray(boxes, dtype=np.float64))
    if features.shape[1] != params.feature_dim:
        raise DimensionMismatchError(
            f'Feature dimension {features.shape[1]} does not match regressor '
            f'dimension {params.feature_dim}.')
    if features.shape[0] != boxes.shape[0]:
        raise DimensionMismatchError('Features and boxes differ in length.')
    return decode_offsets(boxes, predict_offsets(params, features))


def regressor_apply(params, feature, box):
    """Refines a single BoundingBox given its feature vector."""
    feature = np.asarray(feature, dtype=np.float64)
    if feature.ndim != 1:
        raise DimensionMismatchError('Expected a single feature vector.')
    refined = regressor_apply_array(params, feature[np.newaxis],
                                    box.as_array()[np.newaxis])
    return box_lib.from_array(refined[0])


def _as_box_array(boxes):
    if isinstance(boxes, np.ndarray):
        return boxes.astype(np.float64)
    return box_lib.to_array(list(boxes))
