"""Builds training batches of positive and negative RGB + TIR patches."""
import dataclasses
import logging

import numpy as np
import torch

from geometry import sampling
from model import head
from model import patch

logger = logging.getLogger(__name__)


class Error(Exception):
    pass


class EmptyDomainError(Error):
    pass


@dataclasses.dataclass
class MiniBatch:
    domain: int
    frame_indices: list
    rgb_pos: torch.Tensor
    tir_pos: torch.Tensor
    rgb_neg: torch.Tensor
    tir_neg: torch.Tensor
    # Boxes and their frame's ground truth, row-aligned with the patches.
    pos_boxes: np.ndarray
    pos_gts: np.ndarray
    neg_boxes: np.ndarray
    neg_gts: np.ndarray

    @property
    def labels(self):
        return torch.cat([
            torch.ones(len(self.rgb_pos), dtype=torch.long),
            torch.zeros(len(self.rgb_neg), dtype=torch.long)
        ])

    @property
    def rgb(self):
        return torch.cat([self.rgb_pos, self.rgb_neg])

    @property
    def tir(self):
        return torch.cat([self.tir_pos, self.tir_neg])


def _split(total, parts):
    return [len(chunk) for chunk in np.array_split(np.arange(total), parts)]


def _sample(frame, gt, n, iou_lo, iou_hi, sigma_xy, sigma_scale, rng):
    spec = sampling.SampleSpec(n=n,
                               sigma_xy=sigma_xy,
                               sigma_scale=sigma_scale,
                               seed=int(rng.integers(2**31)))
    boxes = sampling.sample_by_iou_array(gt, n, iou_lo, iou_hi, spec,
                                         frame.image_bounds)
    return (boxes, patch.extract_patches(frame.rgb, boxes),
            patch.extract_patches(frame.tir, boxes))


def make_minibatch(sequence, domain, config, rng, score_fn=None):
    """Draws one batch from the annotated frames of `sequence`.

    Args:
        sequence: A dataset.sequence.Sequence.
        domain: FC6 index of the sequence.
        config: A TrainConfig.
        rng: numpy Generator driving every random choice.
        score_fn: Optional callable (rgb, tir) -> positive scores, used to
            keep the `neg_per_batch` hardest of `neg_candidates` negatives.
            Without it the kept negatives are a random subset.

    Raises:
        EmptyDomainError: If the sequence has no annotated frame.
    """
    annotated = sequence.annotated_indices()
    if not annotated:
        raise EmptyDomainError(
            f'Sequence {sequence.name} has no annotated frames.')
    frame_indices = rng.choice(annotated,
                               size=config.frames_per_batch,
                               replace=len(annotated) < config.frames_per_batch)
    frame_indices = [int(i) for i in frame_indices]

    pos_parts, neg_parts = [], []
    for index, n_pos, n_neg in zip(
            frame_indices, _split(config.pos_per_batch,
                                  config.frames_per_batch),
            _split(config.neg_candidates, config.frames_per_batch)):
        frame = sequence.frame(index)
        gt = sequence.gt_box(index)
        gt_rows = np.tile(gt.as_array(), (1, 1))
        boxes, rgb, tir = _sample(frame, gt, n_pos, config.pos_iou, 1.0,
                                  config.pos_sigma_xy,
                                  config.pos_sigma_scale, rng)
        pos_parts.append((boxes, np.repeat(gt_rows, len(boxes), 0), rgb, tir))
        boxes, rgb, tir = _sample(frame, gt, n_neg, 0.0, config.neg_iou,
                                  config.neg_sigma_xy,
                                  config.neg_sigma_scale, rng)
        neg_parts.append((boxes, np.repeat(gt_rows, len(boxes), 0), rgb, tir))

    pos_boxes, pos_gts, rgb_pos, tir_pos = _concat(pos_parts)
    neg_boxes, neg_gts, rgb_neg, tir_neg = _concat(neg_parts)

    if config.neg_per_batch < len(neg_boxes):
        if score_fn is None:
            keep = np.sort(
                rng.permutation(len(neg_boxes))[:config.neg_per_batch])
        else:
            keep = head.hard_negative_mining(score_fn(rgb_neg, tir_neg),
                                             config.neg_per_batch)
        keep_tensor = torch.from_numpy(np.asarray(keep, dtype=np.int64))
        neg_boxes, neg_gts = neg_boxes[keep], neg_gts[keep]
        rgb_neg, tir_neg = rgb_neg[keep_tensor], tir_neg[keep_tensor]

    return MiniBatch(domain, frame_indices, rgb_pos, tir_pos, rgb_neg,
                     tir_neg, pos_boxes, pos_gts, neg_boxes, neg_gts)


def _concat(parts):
    boxes, gts, rgb, tir = zip(*parts)
    return (np.concatenate(boxes), np.concatenate(gts), torch.cat(rgb),
            torch.cat(tir))
