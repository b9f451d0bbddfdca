"""Challenge attributes used to label and break down evaluation sequences.

A sequence declares its attributes either in an `attributes.txt` file listing
attribute codes, or through per-attribute `<CODE>.tag` files holding one 0/1
flag per frame (a sequence carries the attribute if any frame is flagged).
"""
import enum
import logging
import os
import re

import atomic_file

logger = logging.getLogger(__name__)

ATTRIBUTES_FILENAME = 'attributes.txt'
TAG_SUFFIX = '.tag'


class Error(Exception):
    pass


class UnknownAttributeError(Error):
    pass


class EvalAttributeId(enum.Enum):
    BACKGROUND_CLUTTER = 'BC'
    CAMERA_MOVING = 'CM'
    DEFORMATION = 'DEF'
    FAST_MOTION = 'FM'
    HEAVY_OCCLUSION = 'HO'
    LOW_ILLUMINATION = 'LI'
    LOW_RESOLUTION = 'LR'
    MOTION_BLUR = 'MB'
    NO_OCCLUSION = 'NO'
    PARTIAL_OCCLUSION = 'PO'
    SCALE_VARIATION = 'SV'
    THERMAL_CROSSOVER = 'TC'

    def __str__(self):
        return str(self.value)


# Evaluation flags that make a sequence training data for a fusion branch,
# keyed by the branch's attribute code.
BRANCH_FLAGS = {
    'TC': frozenset([EvalAttributeId.THERMAL_CROSSOVER]),
    'IV': frozenset([EvalAttributeId.LOW_ILLUMINATION]),
    'SV': frozenset([EvalAttributeId.SCALE_VARIATION]),
    'OCC': frozenset([
        EvalAttributeId.PARTIAL_OCCLUSION, EvalAttributeId.HEAVY_OCCLUSION
    ]),
    'FM': frozenset([EvalAttributeId.FAST_MOTION]),
}


def parse(code):
    """Returns the EvalAttributeId for a code such as 'po' or 'PO'."""
    try:
        return EvalAttributeId(code.strip().upper())
    except ValueError as e:
        raise UnknownAttributeError(f'Unknown attribute code: {code}') from e


def parse_codes(text):
    """Parses attribute codes separated by commas and/or whitespace."""
    return frozenset(parse(code) for code in re.split(r'[,\s]+', text) if code)


def format_codes(flags):
    return ','.join(sorted(str(flag) for flag in flags))


def read_tag_file(path):
    """Returns the per-frame 0/1 flags of a `<CODE>.tag` file."""
    with open(path, encoding='utf-8') as f:
        return [int(float(value)) != 0 for value in f.read().split()]


def read_sequence_attributes(sequence_dir):
    """Collects the attribute flags of one sequence directory.

    Returns:
        A tuple (flags, frame_flags): the frozenset of EvalAttributeId values
        the sequence carries, and a dict from EvalAttributeId to per-frame
        boolean lists for attributes declared through tag files.
    """
    flags = set()
    frame_flags = {}
    listing_path = os.path.join(sequence_dir, ATTRIBUTES_FILENAME)
    if os.path.isfile(listing_path):
        with open(listing_path, encoding='utf-8') as f:
            flags.update(parse_codes(f.read()))
    for filename in sorted(os.listdir(sequence_dir)):
        if not filename.endswith(TAG_SUFFIX):
            continue
        try:
            attribute = parse(filename[:-len(TAG_SUFFIX)])
        except UnknownAttributeError:
            logger.warning('Ignoring tag file with unknown attribute: %s',
                           os.path.join(sequence_dir, filename))
            continue
        per_frame = read_tag_file(os.path.join(sequence_dir, filename))
        frame_flags[attribute] = per_frame
        if any(per_frame):
            flags.add(attribute)
    return frozenset(flags), frame_flags


def write_attributes(sequence_dir, flags):
    atomic_file.write_text(os.path.join(sequence_dir, ATTRIBUTES_FILENAME),
                           format_codes(flags) + '\n')
