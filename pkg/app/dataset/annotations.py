"""Parses ground-truth annotation files.

Every non-empty line holds one box, with values separated by commas, tabs or
spaces. Four values are either (x, y, w, h) or corners (x1, y1, x2, y2),
depending on the dataset; eight values are a polygon and become its enclosing
axis-aligned box. An all-zero line is kept as a zero row; it and any row
with a non-positive width or height mark a frame without ground truth.
"""
import enum
import re

import numpy as np

from geometry import box as box_lib

_SEPARATORS = re.compile(r'[,\s]+')


class Error(Exception):
    pass


class AnnotationParseError(Error):

    def __init__(self, path, line_number, message):
        super().__init__(f'{path}:{line_number}: {message}')
        self.path = path
        self.line_number = line_number


class BoxFormat(enum.Enum):
    XYWH = 'xywh'
    CORNERS = 'corners'

    def __str__(self):
        return str(self.value)


def parse_line(line, box_format=BoxFormat.XYWH):
    """Parses one annotation line into an (x, y, w, h) array.

    Raises:
        ValueError: If the line does not hold 4 or 8 finite numbers.
    """
    values = [float(v) for v in _SEPARATORS.split(line.strip()) if v]
    if len(values) not in (4, 8):
        raise ValueError(f'expected 4 or 8 values, got {len(values)}')
    values = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError('values must be finite')
    if not values.any():
        return np.zeros(4)
    if len(values) == 8:
        return box_lib.polygon_to_xywh(values)
    if BoxFormat(box_format) == BoxFormat.CORNERS:
        return box_lib.corners_to_xywh(values)
    return values


def parse_text(text, box_format=BoxFormat.XYWH, path='<text>'):
    """Parses a whole annotation file body into an (N, 4) array."""
    rows = []
    for line_number, line in enumerate(text.rstrip().splitlines(), start=1):
        if not line.strip():
            raise AnnotationParseError(path, line_number, 'empty line')
        try:
            rows.append(parse_line(line, box_format))
        except ValueError as e:
            raise AnnotationParseError(path, line_number, str(e)) from e
    return np.array(rows, dtype=np.float64).reshape(-1, 4)


def read(path, box_format=BoxFormat.XYWH):
    with open(path, encoding='utf-8') as f:
        return parse_text(f.read(), box_format, path)


def format_rows(boxes, decimals=None):
    """Formats (N, 4) boxes as comma-separated lines.

    With `decimals` unset, values are rounded to integers.
    """
    lines = []
    for row in np.asarray(boxes, dtype=np.float64).reshape(-1, 4):
        if decimals is None:
            lines.append(','.join(str(int(round(v))) for v in row))
        else:
            lines.append(','.join(f'{v:.{decimals}f}' for v in row))
    return '\n'.join(lines) + ('\n' if lines else '')


def is_annotated(rows):
    """True where a row (or each row of an (N, 4) array) holds a usable box.

    All-zero rows and rows with a non-positive width or height mark frames
    without ground truth.
    """
    rows = np.asarray(rows, dtype=np.float64)
    return (rows[..., 2] > 0) & (rows[..., 3] > 0)
