"""Draws candidate boxes around a target.

All sampling is driven by an explicit seed, so the same SampleSpec always
yields the same boxes.
"""
import dataclasses
import logging

import numpy as np

from geometry import box as box_lib

logger = logging.getLogger(__name__)

# Rejection sampling draws at most this many boxes per requested box.
_ATTEMPTS_PER_BOX = 100


class Error(Exception):
    pass


class InvalidSampleSpecError(Error):
    pass


class SamplingBudgetExhaustedError(Error):
    pass


@dataclasses.dataclass(frozen=True)
class SampleSpec:
    # Number of boxes to draw.
    n: int
    # Standard deviation of the translation, as a fraction of the mean box
    # side length.
    sigma_xy: float
    # Standard deviation of the log-scale factor.
    sigma_scale: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise InvalidSampleSpecError('Sample count must not be negative.')
        if self.sigma_xy < 0 or self.sigma_scale < 0:
            raise InvalidSampleSpecError('Sigmas must not be negative.')

    def reseeded(self, seed):
        return dataclasses.replace(self, seed=int(seed))


def gaussian_sample_array(center, spec, image_bounds, rng=None):
    """Draws `spec.n` boxes around `center` as an (n, 4) array.

    Translations follow a zero-mean normal distribution scaled by the mean box
    side, the scale factor follows a log-normal distribution. The aspect ratio
    is kept. Boxes are clipped to the image.

    Args:
        center: The BoundingBox to sample around.
        spec: A SampleSpec.
        image_bounds: A tuple (width, height) of the image in pixels.
        rng: Optional numpy Generator. When absent, one is seeded from
            `spec.seed`.

    Returns:
        A float64 array with shape (spec.n, 4).
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    if spec.n == 0:
        return np.zeros((0, 4), dtype=np.float64)
    cx, cy = center.center
    side = (center.w + center.h) / 2.0
    offsets = rng.standard_normal((spec.n, 2)) * spec.sigma_xy * side
    scales = np.exp(rng.standard_normal(spec.n) * spec.sigma_scale)
    widths = center.w * scales
    heights = center.h * scales
    boxes = np.stack([
        cx + offsets[:, 0] - widths / 2.0,
        cy + offsets[:, 1] - heights / 2.0,
        widths,
        heights,
    ],
                     axis=1)
    if spec.sigma_xy == 0 and spec.sigma_scale == 0:
        boxes[:] = center.as_array()
    return box_lib.clip_array(boxes, image_bounds)


def gaussian_sample(center, spec, image_bounds):
    """Draws `spec.n` candidate boxes around `center`.

    Returns:
        A list of BoundingBox objects of length `spec.n`.
    """
    return [
        box_lib.from_array(row)
        for row in gaussian_sample_array(center, spec, image_bounds)
    ]


def sample_by_iou_array(gt, n, iou_lo, iou_hi, spec, image_bounds,
                        max_attempts=None):
    """Rejection-samples `n` boxes whose IoU with `gt` lies in a band.

    Candidates are drawn with `gaussian_sample_array` around `gt` using the
    sigmas of `spec`; `spec.n` is ignored.

    Args:
        gt: The reference BoundingBox.
        n: Number of boxes to return.
        iou_lo: Lower IoU bound (inclusive).
        iou_hi: Upper IoU bound (inclusive).
        spec: A SampleSpec providing the sigmas and the seed.
        image_bounds: A tuple (width, height) of the image in pixels.
        max_attempts: Maximum number of candidate boxes to draw. Defaults to
            100 per requested box.

    Returns:
        A float64 array with shape (n, 4).

    Raises:
        InvalidSampleSpecError: If the IoU band is invalid.
        SamplingBudgetExhaustedError: If fewer than `n` qualifying boxes were
            found within the attempt budget.
    """
    if not 0.0 <= iou_lo <= iou_hi <= 1.0:
        raise InvalidSampleSpecError(
            f'Invalid IoU band [{iou_lo}, {iou_hi}], expected '
            '0 <= lo <= hi <= 1.')
    if n == 0:
        return np.zeros((0, 4), dtype=np.float64)
    if max_attempts is None:
        max_attempts = _ATTEMPTS_PER_BOX * n
    rng = np.random.default_rng(spec.seed)
    gt_array = gt.as_array()
    accepted = []
    accepted_count = 0
    attempts = 0
    while accepted_count < n and attempts < max_attempts:
        batch_size = min(max(2 * (n - accepted_count), 64),
                         max_attempts - attempts)
        batch_spec = dataclasses.replace(spec, n=batch_size)
        candidates = gaussian_sample_array(gt, batch_spec, image_bounds, rng)
        attempts += batch_size
        ratios = box_lib.overlap_ratios(candidates, gt_array)
        keep = candidates[(ratios >= iou_lo) & (ratios <= iou_hi)]
        accepted.append(keep)
        accepted_count += len(keep)
    if accepted_count < n:
        raise SamplingBudgetExhaustedError(
            f'Found only {accepted_count} of {n} boxes with IoU in '
            f'[{iou_lo}, {iou_hi}] after {attempts} attempts.')
    return np.concatenate(accepted)[:n]


def sample_by_iou(gt, n, iou_lo, iou_hi, spec, image_bounds,
                  max_attempts=None):
    """List-of-boxes variant of `sample_by_iou_array`."""
    return [
        box_lib.from_array(row) for row in sample_by_iou_array(
            gt, n, iou_lo, iou_hi, spec, image_bounds, max_attempts)
    ]
