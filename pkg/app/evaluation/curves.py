"""Writes precision and success curves as CSV files and plots.

Every tracker gets its own `<tracker>_precision.csv` and
`<tracker>_success.csv`. The plots hold one series per tracker, labelled
with its PR at 20 pixels or its SR score.
"""
import csv
import enum
import io
import logging
import os
import re

import matplotlib

matplotlib.use('Agg')

# pylint: disable=wrong-import-position
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

import atomic_file  # noqa: E402
from evaluation import metrics  # noqa: E402

logger = logging.getLogger(__name__)

PRECISION_PLOT = 'precision.png'
SUCCESS_PLOT = 'success.png'


class Error(Exception):
    pass


class CurveFileError(Error):
    pass


class CurveFormat(enum.Enum):
    CSV = 'csv'
    IMAGE = 'image'

    def __str__(self):
        return str(self.value)


def _slug(name):
    return re.sub(r'[^A-Za-z0-9._-]+', '_', name).strip('_') or 'tracker'


def precision_label(report):
    return f'{report.tracker_name} [{report.overall.pr:.3f}]'


def success_label(report):
    return f'{report.tracker_name} [{report.overall.sr:.3f}]'


def format_curve(curve):
    text = io.StringIO()
    writer = csv.writer(text, lineterminator='\n')
    writer.writerow(('threshold', 'rate'))
    for threshold, rate in zip(curve.thresholds, curve.rates):
        writer.writerow((repr(float(threshold)), repr(float(rate))))
    return text.getvalue()


def read_curve(path):
    """Parses a curve CSV file back into an EvalCurve."""
    try:
        with open(path, encoding='utf-8', newline='') as f:
            rows = list(csv.DictReader(f))
        return metrics.EvalCurve(
            np.array([float(r['threshold']) for r in rows]),
            np.array([float(r['rate']) for r in rows]))
    except (OSError, KeyError, ValueError) as e:
        raise CurveFileError(f'Cannot read curve file {path}: {e}') from e


def _plot(series, title, xlabel, path):
    fig, ax = plt.subplots(1, 1, figsize=(6, 5), tight_layout=True)
    for label, curve in series:
        ax.plot(curve.thresholds, curve.rates, linewidth=2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel('Rate')
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.grid(True, linestyle='-')
    ax.legend(loc='best')
    data = io.BytesIO()
    fig.savefig(data, format='png', dpi=150)
    plt.close(fig)
    with atomic_file.create(path) as f:
        f.write(data.getvalue())


def emit_curves(reports, out_dir, formats=(CurveFormat.CSV, CurveFormat.IMAGE)):
    """Writes the curves of one or more EvalReports.

    Args:
        reports: EvalReport objects, one per tracker.
        out_dir: Destination folder, created if needed.
        formats: CurveFormat values to emit.

    Returns:
        The list of written paths.

    Raises:
        OSError: If `out_dir` cannot be written.
    """
    reports = [r for r in reports if r.overall is not None]
    formats = {CurveFormat(f) for f in formats}
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if CurveFormat.CSV in formats:
        for report in reports:
            slug = _slug(report.tracker_name)
            for suffix, curve in (('precision', report.overall.precision),
                                  ('success', report.overall.success)):
                path = os.path.join(out_dir, f'{slug}_{suffix}.csv')
                atomic_file.write_text(path, format_curve(curve))
                paths.append(path)
    if CurveFormat.IMAGE in formats and reports:
        precision_path = os.path.join(out_dir, PRECISION_PLOT)
        _plot([(precision_label(r), r.overall.precision) for r in reports],
              'Precision plot', 'Location error threshold (pixels)',
              precision_path)
        success_path = os.path.join(out_dir, SUCCESS_PLOT)
        _plot([(success_label(r), r.overall.success) for r in reports],
              'Success plot', 'Overlap threshold', success_path)
        paths.extend([precision_path, success_path])
    logger.info('Wrote %d curve files to %s', len(paths), out_dir)
    return paths
