"""Aligned RGB + thermal frame pairs and the sequences that hold them."""
import dataclasses
import logging

import cv2
import numpy as np

from dataset import annotations
from geometry import box as box_lib

logger = logging.getLogger(__name__)


class Error(Exception):
    pass


class MisalignedFrameError(Error):
    pass


class SequenceLengthError(Error):
    pass


class ImageReadError(Error):
    pass


def as_three_channels(image):
    """Replicates a single-channel image to (H, W, 3)."""
    image = np.asarray(image)
    if image.ndim == 2:
        return np.repeat(image[:, :, np.newaxis], 3, axis=2)
    if image.shape[2] == 1:
        return np.repeat(image, 3, axis=2)
    return image


@dataclasses.dataclass(frozen=True, eq=False)
class FramePair:
    rgb: np.ndarray
    tir: np.ndarray
    index: int = 0

    def __post_init__(self):
        if self.rgb.ndim != 3 or self.rgb.shape[2] != 3:
            raise MisalignedFrameError(
                f'RGB frame {self.index} must be H x W x 3, got '
                f'{self.rgb.shape}.')
        if self.tir.shape[:2] != self.rgb.shape[:2]:
            raise MisalignedFrameError(
                f'Frame {self.index}: RGB is {self.rgb.shape[:2]} but TIR is '
                f'{self.tir.shape[:2]}.')

    @property
    def image_bounds(self):
        """(width, height) of the frame."""
        return self.rgb.shape[1], self.rgb.shape[0]


def read_image(path, grayscale=False):
    flag = cv2.IMREAD_GRAYSCALE if grayscale else cv2.IMREAD_COLOR
    image = cv2.imread(str(path), flag)
    if image is None:
        raise ImageReadError(f'Cannot read image: {path}')
    if grayscale:
        return as_three_channels(image)
    return cv2.cvtColor(image, cv2.COLOR_BGR2RGB)


class Sequence:
    """A named RGBT video with per-frame ground truth and attribute flags.

    Frames are produced by `frame_source(index)`, so file-backed sequences
    only read the images they are asked for.
    """

    def __init__(self,
                 name,
                 frame_count,
                 frame_source,
                 ground_truth,
                 tir_ground_truth=None,
                 attributes=frozenset(),
                 frame_attributes=None):
        ground_truth = np.asarray(ground_truth, dtype=np.float64).reshape(-1,
                                                                          4)
        if len(ground_truth) != frame_count:
            raise SequenceLengthError(
                f'Sequence {name} has {frame_count} frames but '
                f'{len(ground_truth)} ground-truth boxes.')
        if tir_ground_truth is not None:
            tir_ground_truth = np.asarray(tir_ground_truth,
                                          dtype=np.float64).reshape(-1, 4)
            if len(tir_ground_truth) != frame_count:
                raise SequenceLengthError(
                    f'Sequence {name} has {frame_count} frames but '
                    f'{len(tir_ground_truth)} thermal ground-truth boxes.')
        self.name = name
        self.ground_truth = ground_truth
        self.tir_ground_truth = tir_ground_truth
        self.attributes = frozenset(attributes)
        self.frame_attributes = dict(frame_attributes or {})
        self._frame_count = frame_count
        self._frame_source = frame_source

    def __len__(self):
        return self._frame_count

    def __repr__(self):
        return (f'Sequence(name={self.name!r}, frames={len(self)}, '
                f'attributes={sorted(str(a) for a in self.attributes)})')

    def frame(self, index):
        if not 0 <= index < len(self):
            raise IndexError(
                f'Frame {index} is outside sequence {self.name} of length '
                f'{len(self)}.')
        return self._frame_source(index)

    def frames(self):
        for index in range(len(self)):
            yield self.frame(index)

    def gt_box(self, index):
        """The BoundingBox of frame `index`, or None if it is unannotated."""
        row = self.ground_truth[index]
        if not annotations.is_annotated(row):
            return None
        return box_lib.from_array(row)

    def annotated_indices(self):
        return [i for i in range(len(self)) if self.gt_box(i) is not None]


def from_arrays(name,
                rgb_frames,
                tir_frames,
                ground_truth,
                attributes=frozenset(),
                frame_attributes=None):
    """Builds an in-memory sequence from lists of images."""
    if len(rgb_frames) != len(tir_frames):
        raise SequenceLengthError(
            f'Sequence {name} has {len(rgb_frames)} RGB frames but '
            f'{len(tir_frames)} TIR frames.')
    rgb_frames = [np.asarray(f) for f in rgb_frames]
    tir_frames = [as_three_channels(f) for f in tir_frames]

    def source(index):
        return FramePair(rgb_frames[index], tir_frames[index], index)

    return Sequence(name,
                    len(rgb_frames),
                    source,
                    ground_truth,
                    attributes=attributes,
                    frame_attributes=frame_attributes)


def from_files(name,
               rgb_paths,
               tir_paths,
               ground_truth,
               tir_ground_truth=None,
               attributes=frozenset(),
               frame_attributes=None):
    """Builds a file-backed sequence; images are read on access."""
    rgb_paths = list(rgb_paths)
    tir_paths = list(tir_paths)

    def source(index):
        return FramePair(read_image(rgb_paths[index]),
                         read_image(tir_paths[index], grayscale=True), index)

    return Sequence(name,
                    len(rgb_paths),
                    source,
                    ground_truth,
                    tir_ground_truth=tir_ground_truth,
                    attributes=attributes,
                    frame_attributes=frame_attributes)
