"""Ablation of the aggregation module.

Runs tracking and evaluation twice on the same data and seed: once with the
proposed ESK aggregation and once with the sum variant, which combines the
five branch outputs element-wise. Checkpoints that do not exist yet are
trained first unless `ablation_train` is off.
"""
import dataclasses
import logging
import os

import atomic_file
from cli import commands
from cli import run_config
from cli.registry import command
from evaluation import report as report_lib
from model import architecture
from model import fusion
from training import checkpoint as checkpoint_lib

logger = logging.getLogger(__name__)

ABLATION_TABLE = 'ablation.txt'

# Column order and labels of the comparison table.
VARIANT_LABELS = (
    (architecture.Variant.SUM, 'Var-AggESK'),
    (architecture.Variant.AGG_ESK, 'Proposed Method'),
)


class Error(Exception):
    pass


class MissingAblationCheckpointError(Error):
    pass


@dataclasses.dataclass
class AblationResult:
    proposed: report_lib.EvalReport
    variant: report_lib.EvalReport
    # Variant -> parameter count of its phase-2 checkpoint.
    parameter_counts: dict
    table: str


def _ensure_branches(config, sequences):
    for attribute in fusion.AttributeId:
        path = config.checkpoint_path(
            run_config.phase1_checkpoint_name(attribute))
        if not os.path.isfile(path):
            logger.info('Training missing phase-1 checkpoint for %s',
                        attribute)
            commands.train_branch(config, sequences, attribute)


def _ensure_checkpoint(config, sequences):
    path = config.checkpoint_path(
        run_config.phase2_checkpoint_name(config.variant))
    if os.path.isfile(path):
        return path
    if not config['ablation_train']:
        raise MissingAblationCheckpointError(
            f'No {config.variant} checkpoint at {path} and training is off.')
    _ensure_branches(config, sequences)
    return commands.train_aggregation(config, sequences)


def run_ablation(config, sequences=None):
    """Tracks and evaluates both aggregation variants.

    Args:
        config: A RunConfig; its `variant` key is ignored.
        sequences: Optional sequences to use instead of the dataset at
            `data_root`. They must exist on disk under `data_root`.

    Returns:
        An AblationResult.
    """
    if sequences is None:
        sequences = commands.load_sequences(config)
    reports = {}
    counts = {}
    for variant, label in VARIANT_LABELS:
        variant_config = config.with_overrides({
            'variant': str(variant),
            'tracker_name': label,
            'model': '',
        })
        path = _ensure_checkpoint(variant_config, sequences)
        counts[variant] = checkpoint_lib.load(path).parameter_count()
        commands.track_all(variant_config, sequences, path, str(variant))
        reports[variant] = commands.evaluate_results(variant_config,
                                                     sequences, str(variant),
                                                     label)

    table = report_lib.format_comparison([
        (label, reports[variant]) for variant, label in VARIANT_LABELS
    ])
    reports_dir = config.out_path(run_config.REPORTS_DIR)
    os.makedirs(reports_dir, exist_ok=True)
    atomic_file.write_text(os.path.join(reports_dir, ABLATION_TABLE), table)
    logger.info('Parameters: %s',
                ', '.join(f'{v} {counts[v]}' for v, _ in VARIANT_LABELS))
    return AblationResult(proposed=reports[architecture.Variant.AGG_ESK],
                          variant=reports[architecture.Variant.SUM],
                          parameter_counts=counts,
                          table=table)


@command('ablate')
def ablate(args):
    """Compares the proposed aggregation with the sum variant."""
    parser = commands.run_parser('ablate', ablate.__doc__)
    parser.add_argument('--workers', type=int)
    parsed = parser.parse_args(args[1:])
    config = commands.resolve(parsed, workers=parsed.workers)
    print(run_ablation(config).table, end='')
