"""Writes sequences to disk in one of the supported dataset layouts."""
import logging
import os

import cv2
import numpy as np

import atomic_file
from dataset import annotations
from dataset import attributes as attributes_lib
from dataset import loaders

logger = logging.getLogger(__name__)


class Error(Exception):
    pass


class ImageWriteError(Error):
    pass


def _annotation_text(boxes, box_format):
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4).copy()
    if box_format == annotations.BoxFormat.CORNERS:
        present = np.any(boxes != 0, axis=1)
        boxes[present, 2] += boxes[present, 0]
        boxes[present, 3] += boxes[present, 1]
    integral = np.all(boxes == np.round(boxes))
    return annotations.format_rows(boxes, decimals=None if integral else 3)


def _write_image(path, image):
    if not cv2.imwrite(path, image):
        raise ImageWriteError(f'Cannot write image: {path}')


def write_sequence(sequence, root, dataset_kind=loaders.DatasetKind.RGBT234):
    """Writes every frame, the ground truth and the attributes of a sequence.

    Frames are stored as lossless PNG files numbered from 1.

    Returns:
        The path of the sequence directory.
    """
    layout = loaders.LAYOUTS[loaders.DatasetKind(dataset_kind)]
    sequence_dir = os.path.join(root, sequence.name)
    rgb_dir = os.path.join(sequence_dir, layout.rgb_dir)
    tir_dir = os.path.join(sequence_dir, layout.tir_dir)
    os.makedirs(rgb_dir, exist_ok=True)
    os.makedirs(tir_dir, exist_ok=True)

    for pair in sequence.frames():
        filename = f'{pair.index + 1:05d}.png'
        _write_image(os.path.join(rgb_dir, filename),
                     cv2.cvtColor(pair.rgb, cv2.COLOR_RGB2BGR))
        _write_image(os.path.join(tir_dir, filename),
                     np.ascontiguousarray(pair.tir[:, :, 0]))

    tir_ground_truth = (sequence.ground_truth
                        if sequence.tir_ground_truth is None else
                        sequence.tir_ground_truth)
    for filename, boxes in ((layout.rgb_annotations[0],
                             sequence.ground_truth),
                            (layout.tir_annotations[0], tir_ground_truth)):
        atomic_file.write_text(os.path.join(sequence_dir, filename),
                               _annotation_text(boxes, layout.box_format))

    attributes_lib.write_attributes(sequence_dir, sequence.attributes)
    for attribute, per_frame in sequence.frame_attributes.items():
        atomic_file.write_text(
            os.path.join(sequence_dir,
                         f'{attribute}{attributes_lib.TAG_SUFFIX}'),
            ''.join(f'{int(flag)}\n' for flag in per_frame))
    logger.info('Wrote %s (%d frames) to %s', sequence.name, len(sequence),
                sequence_dir)
    return sequence_dir
