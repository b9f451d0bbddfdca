"""Tracking result files.

A result file holds one line per frame, in frame order, with the integer box
"x,y,w,h" of the tracker's output. The per-frame record file is a CSV with
the score and update decisions behind every box.
"""
import csv
import io
import os

import numpy as np

import atomic_file
from dataset import annotations

RESULT_SUFFIX = '.txt'
RECORDS_SUFFIX = '.records.csv'

_RECORD_COLUMNS = ('frame', 'score', 'success', 'argmax', 'top', 'update')


class Error(Exception):
    pass


class ResultFileError(Error):
    pass


def path_for(results_dir, name):
    return os.path.join(results_dir, name + RESULT_SUFFIX)


def write(boxes, result_file):
    """Writes (N, 4) boxes to a text file handle."""
    result_file.write(annotations.format_rows(boxes))


def read(result_file, path='<result>'):
    """Parses a result file handle into an (N, 4) float array."""
    try:
        return annotations.parse_text(result_file.read(), path=path)
    except annotations.AnnotationParseError as e:
        raise ResultFileError(str(e)) from e


def save(results_dir, name, boxes):
    os.makedirs(results_dir, exist_ok=True)
    text = io.StringIO()
    write(boxes, text)
    path = path_for(results_dir, name)
    atomic_file.write_text(path, text.getvalue())
    return path


def load(results_dir, name):
    path = path_for(results_dir, name)
    try:
        with open(path, encoding='utf-8') as f:
            return read(f, path)
    except OSError as e:
        raise ResultFileError(f'Cannot read result file {path}: {e}') from e


def save_records(results_dir, name, records):
    """Writes the per-frame FrameRecords of one sequence."""
    text = io.StringIO()
    writer = csv.writer(text, lineterminator='\n')
    writer.writerow(_RECORD_COLUMNS)
    for record in records:
        writer.writerow([
            record.index, f'{record.score:.6f}',
            int(record.success), record.argmax_index,
            ' '.join(str(i) for i in record.top_indices),
            '' if record.update is None else str(record.update)
        ])
    path = os.path.join(results_dir, name + RECORDS_SUFFIX)
    atomic_file.write_text(path, text.getvalue())
    return path


def boxes_equal(first, second):
    """True if two result arrays hold the same integer boxes."""
    first = np.rint(np.asarray(first, dtype=np.float64))
    second = np.rint(np.asarray(second, dtype=np.float64))
    return first.shape == second.shape and bool(np.all(first == second))
