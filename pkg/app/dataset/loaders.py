"""Loads sequences from the GTOT, RGBT234 and LasHeR directory layouts.

    GTOT      <root>/<seq>/v/*, <root>/<seq>/i/*,
              groundTruth_v.txt and groundTruth_i.txt, corners x1 y1 x2 y2
    RGBT234   <root>/<seq>/visible/*, <root>/<seq>/infrared/*,
              visible.txt and infrared.txt, x,y,w,h
    LasHeR    <root>/<seq>/visible/*, <root>/<seq>/infrared/*,
              visible.txt (or init.txt) and infrared.txt, x,y,w,h

Frames of each modality are paired by sorted filename. Evaluation uses the
visible ground truth; the thermal one is kept alongside when present.
"""
import dataclasses
import enum
import logging
import os

from dataset import annotations
from dataset import attributes as attributes_lib
from dataset import sequence as sequence_lib

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = ('.bmp', '.jpeg', '.jpg', '.png', '.tif', '.tiff')


class Error(Exception):
    pass


class MissingDirectoryError(Error):
    pass


class MissingAnnotationError(Error):
    pass


class FrameCountMismatchError(Error):

    def __init__(self, name, rgb_count, tir_count):
        super().__init__(f'Sequence {name} has {rgb_count} RGB frames but '
                         f'{tir_count} TIR frames.')
        self.rgb_count = rgb_count
        self.tir_count = tir_count


class DatasetKind(enum.Enum):
    GTOT = 'gtot'
    RGBT234 = 'rgbt234'
    LASHER = 'lasher'

    def __str__(self):
        return str(self.value)


@dataclasses.dataclass(frozen=True)
class Layout:
    rgb_dir: str
    tir_dir: str
    # Candidate visible ground-truth files, first existing one wins.
    rgb_annotations: tuple
    tir_annotations: tuple
    box_format: annotations.BoxFormat


LAYOUTS = {
    DatasetKind.GTOT:
        Layout('v', 'i', ('groundTruth_v.txt',), ('groundTruth_i.txt',),
               annotations.BoxFormat.CORNERS),
    DatasetKind.RGBT234:
        Layout('visible', 'infrared', ('visible.txt', 'init.txt'),
               ('infrared.txt',), annotations.BoxFormat.XYWH),
    DatasetKind.LASHER:
        Layout('visible', 'infrared', ('visible.txt', 'init.txt'),
               ('infrared.txt',), annotations.BoxFormat.XYWH),
}


def list_sequences(root, dataset_kind=DatasetKind.RGBT234):
    """Sorted names of the sequence directories under `root`.

    Hidden entries and plain files are ignored.
    """
    del dataset_kind  # All layouts keep one directory per sequence.
    if not os.path.isdir(root):
        raise MissingDirectoryError(f'Dataset root does not exist: {root}')
    return sorted(
        entry.name
        for entry in os.scandir(root)
        if entry.is_dir() and not entry.name.startswith('.'))


def list_images(directory):
    if not os.path.isdir(directory):
        raise MissingDirectoryError(f'Frame directory does not exist: '
                                    f'{directory}')
    return [
        os.path.join(directory, name)
        for name in sorted(os.listdir(directory))
        if not name.startswith('.') and
        os.path.splitext(name)[1].lower() in IMAGE_EXTENSIONS
    ]


def _first_existing(sequence_dir, candidates):
    for filename in candidates:
        path = os.path.join(sequence_dir, filename)
        if os.path.isfile(path):
            return path
    return None


def load_sequence(root, dataset_kind, name):
    """Loads one sequence; images are read lazily.

    Raises:
        MissingDirectoryError: If the sequence or a frame folder is missing.
        MissingAnnotationError: If no visible ground-truth file exists.
        FrameCountMismatchError: If the modalities have different lengths.
        annotations.AnnotationParseError: For malformed annotation lines.
        sequence.SequenceLengthError: If the ground truth does not cover
            exactly every frame.
    """
    layout = LAYOUTS[DatasetKind(dataset_kind)]
    sequence_dir = os.path.join(root, name)
    if not os.path.isdir(sequence_dir):
        raise MissingDirectoryError(f'Sequence directory does not exist: '
                                    f'{sequence_dir}')
    rgb_paths = list_images(os.path.join(sequence_dir, layout.rgb_dir))
    tir_paths = list_images(os.path.join(sequence_dir, layout.tir_dir))
    if len(rgb_paths) != len(tir_paths):
        raise FrameCountMismatchError(name, len(rgb_paths), len(tir_paths))

    rgb_annotation = _first_existing(sequence_dir, layout.rgb_annotations)
    if rgb_annotation is None:
        raise MissingAnnotationError(
            f'Sequence {name} has none of {list(layout.rgb_annotations)}.')
    ground_truth = annotations.read(rgb_annotation, layout.box_format)
    tir_annotation = _first_existing(sequence_dir, layout.tir_annotations)
    tir_ground_truth = None
    if tir_annotation is not None:
        tir_ground_truth = annotations.read(tir_annotation, layout.box_format)

    flags, frame_flags = attributes_lib.read_sequence_attributes(sequence_dir)
    loaded = sequence_lib.from_files(name,
                                     rgb_paths,
                                     tir_paths,
                                     ground_truth,
                                     tir_ground_truth=tir_ground_truth,
                                     attributes=flags,
                                     frame_attributes=frame_flags)
    logger.debug('Loaded %s (%d frames, attributes %s)', name, len(loaded),
                 attributes_lib.format_codes(flags))
    return loaded


def load_dataset(root, dataset_kind, names=None):
    """Loads every sequence under `root`, or only those in `names`."""
    if names is None:
        names = list_sequences(root, dataset_kind)
    return [load_sequence(root, dataset_kind, name) for name in names]


def filter_by_attribute(sequences, attribute):
    """Sequences carrying `attribute`, in their original order."""
    attribute = attributes_lib.EvalAttributeId(attribute)
    return [s for s in sequences if attribute in s.attributes]
