"""Attribute-wise PR/SR reports over a set of tracking results.

Scores are frame-pooled: the ALL row and every attribute row pool the frames
of their sequences before computing the rates, so an overall score does not
depend on how frames are split into sequences. An attribute without any
sequence renders as "n/a".
"""
import csv
import dataclasses
import io
import logging
import os

import numpy as np

import atomic_file
from dataset import attributes as attributes_lib
from dataset import loaders
from evaluation import metrics
from tracker import result_file

logger = logging.getLogger(__name__)

ALL_ROW = 'ALL'

REPORT_TEXT = 'report.txt'
REPORT_CSV = 'report.csv'
SEQUENCES_CSV = 'sequences.csv'

_CSV_COLUMNS = ('attribute', 'pr', 'sr', 'n_sequences', 'n_frames')


class Error(Exception):
    pass


class MissingResultError(Error):
    pass


@dataclasses.dataclass(frozen=True)
class Scores:
    pr: float
    sr: float
    precision: metrics.EvalCurve
    success: metrics.EvalCurve
    n_sequences: int
    n_frames: int


@dataclasses.dataclass(frozen=True)
class Row:
    label: str
    # None when no sequence carries the attribute.
    scores: Scores

    @property
    def empty(self):
        return self.scores is None


@dataclasses.dataclass
class EvalReport:
    tracker_name: str
    # Sequence name -> Scores.
    sequences: dict
    # One row per evaluation attribute, then the ALL row.
    rows: list

    @property
    def overall(self):
        return self.row(ALL_ROW).scores

    def row(self, label):
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)


def _pooled(errors):
    """Scores of the concatenated (distances, overlaps) of some sequences."""
    distances = np.concatenate([d for d, _ in errors])
    overlaps = np.concatenate([o for _, o in errors])
    precision = metrics.EvalCurve(metrics.PRECISION_THRESHOLDS,
                                  metrics.precision_rates(distances))
    success = metrics.EvalCurve(metrics.SUCCESS_THRESHOLDS,
                                metrics.success_rates(overlaps))
    return Scores(pr=metrics.precision_score(precision),
                  sr=metrics.auc(success),
                  precision=precision,
                  success=success,
                  n_sequences=len(errors),
                  n_frames=len(distances))


def load_results(results_dir, sequences):
    """Reads the result file of every sequence.

    Raises:
        MissingResultError: If a result file is missing, malformed or of the
            wrong length.
    """
    predictions = {}
    for sequence in sequences:
        try:
            boxes = result_file.load(results_dir, sequence.name)
        except result_file.ResultFileError as e:
            raise MissingResultError(
                f'No usable result for sequence {sequence.name}: {e}') from e
        if len(boxes) != len(sequence):
            raise MissingResultError(
                f'Result for sequence {sequence.name} has {len(boxes)} '
                f'boxes, expected {len(sequence)}.')
        predictions[sequence.name] = boxes
    return predictions


def evaluate_predictions(predictions, sequences, tracker_name='EANet'):
    """Builds an EvalReport from in-memory predictions.

    Args:
        predictions: A dict from sequence name to an (N, 4) array.
        sequences: The dataset.sequence.Sequence objects to evaluate.
        tracker_name: Label of the tracker in tables and plots.
    """
    sequences = list(sequences)
    errors = {}
    for sequence in sequences:
        errors[sequence.name] = metrics.frame_errors(
            predictions[sequence.name], sequence.ground_truth)
    scored = [s for s in sequences if len(errors[s.name][0])]
    if len(scored) < len(sequences):
        logger.warning('Skipping %d sequences without ground truth',
                       len(sequences) - len(scored))

    per_sequence = {s.name: _pooled([errors[s.name]]) for s in scored}
    rows = []
    for attribute in attributes_lib.EvalAttributeId:
        members = loaders.filter_by_attribute(scored, attribute)
        rows.append(
            Row(str(attribute),
                _pooled([errors[s.name] for s in members]) if members else
                None))
    rows.append(
        Row(ALL_ROW,
            _pooled([errors[s.name] for s in scored]) if scored else None))
    report = EvalReport(tracker_name, per_sequence, rows)
    if report.overall is not None:
        logger.info('%s: PR %.3f, SR %.3f over %d sequences', tracker_name,
                    report.overall.pr, report.overall.sr,
                    report.overall.n_sequences)
    return report


def evaluate(results_dir, sequences, tracker_name='EANet'):
    """Evaluates the result files in `results_dir` against `sequences`."""
    sequences = list(sequences)
    return evaluate_predictions(load_results(results_dir, sequences),
                                sequences, tracker_name)


def _cell(value):
    return 'n/a' if value is None else f'{value:.3f}'


def format_table(report):
    """Plain-text table with one PR/SR line per attribute."""
    lines = [
        f'Tracker: {report.tracker_name}',
        f'{"Attribute":<10}{"PR":>8}{"SR":>8}{"Seqs":>7}{"Frames":>9}',
    ]
    for row in report.rows:
        scores = row.scores
        if scores is None:
            lines.append(f'{row.label:<10}{"n/a":>8}{"n/a":>8}{0:>7}{0:>9}')
        else:
            lines.append(f'{row.label:<10}{_cell(scores.pr):>8}'
                         f'{_cell(scores.sr):>8}{scores.n_sequences:>7}'
                         f'{scores.n_frames:>9}')
    return '\n'.join(lines) + '\n'


def format_csv(report):
    text = io.StringIO()
    writer = csv.writer(text, lineterminator='\n')
    writer.writerow(_CSV_COLUMNS)
    for row in report.rows:
        scores = row.scores
        if scores is None:
            writer.writerow([row.label, 'n/a', 'n/a', 0, 0])
        else:
            writer.writerow([
                row.label,
                _cell(scores.pr),
                _cell(scores.sr), scores.n_sequences, scores.n_frames
            ])
    return text.getvalue()


def format_sequences_csv(report):
    text = io.StringIO()
    writer = csv.writer(text, lineterminator='\n')
    writer.writerow(('sequence', 'pr', 'sr', 'n_frames'))
    for name in sorted(report.sequences):
        scores = report.sequences[name]
        writer.writerow(
            [name, _cell(scores.pr),
             _cell(scores.sr), scores.n_frames])
    return text.getvalue()


def format_comparison(reports):
    """Side-by-side PR/SR table of several trackers.

    Args:
        reports: A list of (column label, EvalReport) tuples.
    """
    header = f'{"":<10}' + ''.join(f'{label:>20}' for label, _ in reports)
    lines = [header]
    for label in [str(a) for a in attributes_lib.EvalAttributeId] + [ALL_ROW]:
        cells = []
        for _, report in reports:
            scores = report.row(label).scores
            if scores is None:
                cells.append(f'{"n/a":>20}')
            else:
                cells.append(f'{_cell(scores.pr) + "/" + _cell(scores.sr):>20}')
        lines.append(f'{label:<10}' + ''.join(cells))
    return '\n'.join(lines) + '\n'


def save(report, out_dir):
    """Writes the text table and both CSV files; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for filename, text in ((REPORT_TEXT, format_table(report)),
                           (REPORT_CSV, format_csv(report)),
                           (SEQUENCES_CSV, format_sequences_csv(report))):
        path = os.path.join(out_dir, filename)
        atomic_file.write_text(path, text)
        paths.append(path)
    return paths
