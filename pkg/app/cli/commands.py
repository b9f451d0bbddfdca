"""Subcommands of the eanet command-line tool.

Every subcommand accepts the shared options from `run_parser` and writes
its artifacts below the `out` folder:

    <out>/checkpoints/   phase-1 and phase-2 checkpoints
    <out>/results/       one folder of result files per tracker
    <out>/reports/       one folder of report tables per tracker
    <out>/curves/        precision and success curves
"""
import logging
import os

import execute
import log
from cli import run_config
from cli.registry import ArgumentParser
from cli.registry import command
from dataset import loaders
from dataset import synth as synth_lib
from dataset import writer
from evaluation import curves
from evaluation import report as report_lib
from model import fusion
from training import checkpoint as checkpoint_lib
from training import phases
from tracker import result_file
from tracker import tracker as tracker_lib

logger = logging.getLogger(__name__)


def run_parser(name, description):
    parser = ArgumentParser(prog=f'eanet {name}', description=description)
    parser.add_argument('--config', help='key=value configuration file')
    parser.add_argument('--set',
                        action='append',
                        default=[],
                        metavar='KEY=VALUE',
                        help='override one configuration key')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--out', help='folder for all output artifacts')
    parser.add_argument('--data-root', help='dataset folder')
    parser.add_argument('--dataset',
                        choices=[str(k) for k in loaders.DatasetKind])
    parser.add_argument('--variant',
                        choices=['agg-esk', 'sum'],
                        help='aggregation of the attribute branches')
    return parser


def resolve(parsed, **extra):
    """Builds the RunConfig of a parsed command line and logs it."""
    overrides = run_config.parse_overrides(parsed.set)
    flags = {
        'seed': parsed.seed,
        'out': parsed.out,
        'data_root': parsed.data_root,
        'dataset': parsed.dataset,
        'variant': parsed.variant,
    }
    flags.update(extra)
    overrides.update({k: v for k, v in flags.items() if v is not None})
    config = run_config.load(parsed.config, overrides)
    log.log_config(logger, 'Resolved configuration', config.as_dict())
    return config


def dataset_kind(config):
    try:
        return loaders.DatasetKind(config['dataset'])
    except ValueError as e:
        raise run_config.InvalidConfigValueError(
            f'Unknown dataset {config["dataset"]!r}.') from e


def load_sequences(config):
    return loaders.load_dataset(config['data_root'], dataset_kind(config),
                                config.sequence_names)


def _save_checkpoint(config, name, checkpoint):
    path = config.checkpoint_path(name)
    directory = os.path.dirname(path)
    os.makedirs(directory, exist_ok=True)
    checkpoint_lib.save(path, checkpoint)
    run_config.save(config, directory, f'{name}.{run_config.CONFIG_ECHO_FILE}')
    return path


def train_branch(config, sequences, attribute):
    """Runs phase 1 for one attribute; returns the checkpoint path."""
    attribute = fusion.AttributeId(attribute)
    checkpoint = phases.train_phase1(
        attribute,
        phases.sequences_for_attribute(sequences, attribute),
        config.train_config(1),
        spec=config.network_spec(),
        pretrained=config['pretrained'] or None)
    return _save_checkpoint(config,
                            run_config.phase1_checkpoint_name(attribute),
                            checkpoint)


def load_branches(config):
    """Loads the five phase-1 checkpoints.

    Raises:
        phases.MissingBranchCheckpointError: If one of them does not exist.
    """
    branches = {}
    for attribute in fusion.AttributeId:
        path = config.checkpoint_path(
            run_config.phase1_checkpoint_name(attribute))
        if not os.path.isfile(path):
            raise phases.MissingBranchCheckpointError(
                f'No phase-1 checkpoint for {attribute}: {path}')
        branches[attribute] = checkpoint_lib.load(path)
    return branches


def train_aggregation(config, sequences):
    """Runs phase 2 for the configured variant; returns the checkpoint path."""
    checkpoint = phases.train_phase2(sequences,
                                     load_branches(config),
                                     config.train_config(2),
                                     variant=config.variant,
                                     sum_reduction=config['sum_reduction'])
    return _save_checkpoint(config,
                            run_config.phase2_checkpoint_name(config.variant),
                            checkpoint)


def model_path(config):
    """The tracking checkpoint: `model`, or the variant's phase-2 output."""
    if config['model']:
        return config['model']
    return config.checkpoint_path(
        run_config.phase2_checkpoint_name(config.variant))


def track_by_name(root, kind, name, checkpoint_path, tracker_config):
    """Tracks one sequence read from disk.

    Runs in worker processes, so it takes only picklable arguments.
    """
    sequence = loaders.load_sequence(root, kind, name)
    model = checkpoint_lib.load(checkpoint_path)
    return tracker_lib.track_sequence(sequence, model, tracker_config)


def track_all(config, sequences, checkpoint_path, results_name):
    """Tracks every sequence and writes the result files.

    Returns:
        The results folder.
    """
    if not os.path.isfile(checkpoint_path):
        raise checkpoint_lib.CheckpointFormatError(
            f'Tracking checkpoint does not exist: {checkpoint_path}')
    results_dir = config.out_path(run_config.RESULTS_DIR, results_name)
    os.makedirs(results_dir, exist_ok=True)
    tracker_config = config.tracker_config()
    jobs = [(config['data_root'], str(dataset_kind(config)), s.name,
             checkpoint_path, tracker_config) for s in sequences]
    outcomes = execute.raise_first_failure(
        execute.map_with_results(track_by_name, jobs, config['workers']))
    for outcome in outcomes:
        result_file.save(results_dir, outcome.name, outcome.boxes)
        result_file.save_records(results_dir, outcome.name, outcome.records)
    run_config.save(config, results_dir)
    logger.info('Wrote %d result files to %s', len(outcomes), results_dir)
    return results_dir


def evaluate_results(config, sequences, results_name, tracker_name):
    """Evaluates a results folder and saves the report tables."""
    evaluation = report_lib.evaluate(
        config.out_path(run_config.RESULTS_DIR, results_name), sequences,
        tracker_name)
    reports_dir = config.out_path(run_config.REPORTS_DIR, results_name)
    report_lib.save(evaluation, reports_dir)
    run_config.save(config, reports_dir)
    return evaluation


@command('synth')
def synth(args):
    """Writes a synthetic RGB-T dataset to the data root."""
    parser = run_parser('synth', synth.__doc__)
    parser.add_argument('--count', type=int, help='number of sequences')
    parser.add_argument('--frames', type=int, help='frames per sequence')
    parsed = parser.parse_args(args[1:])
    config = resolve(parsed,
                      synth_count=parsed.count,
                      synth_frames=parsed.frames)
    root = config['data_root']
    os.makedirs(root, exist_ok=True)
    for spec in synth_lib.scenario_specs(config['synth_count'],
                                         seed=config.seed,
                                         frames=config['synth_frames']):
        writer.write_sequence(synth_lib.synth_sequence(spec), root,
                              dataset_kind(config))
    run_config.save(config, root)


@command('train-phase1')
def train_phase1(args):
    """Trains the fusion branches of one attribute."""
    parser = run_parser('train-phase1', train_phase1.__doc__)
    parser.add_argument('--attribute',
                        required=True,
                        choices=[str(a) for a in fusion.AttributeId])
    parsed = parser.parse_args(args[1:])
    config = resolve(parsed)
    path = train_branch(config, load_sequences(config), parsed.attribute)
    print(path)


@command('train-phase2')
def train_phase2(args):
    """Trains the aggregation modules on top of the phase-1 branches."""
    parser = run_parser('train-phase2', train_phase2.__doc__)
    config = resolve(parser.parse_args(args[1:]))
    print(train_aggregation(config, load_sequences(config)))


@command('track')
def track(args):
    """Tracks every sequence of the dataset and writes result files."""
    parser = run_parser('track', track.__doc__)
    parser.add_argument('--model', help='checkpoint to track with')
    parser.add_argument('--tracker-name', help='name of the results folder')
    parser.add_argument('--workers', type=int)
    parsed = parser.parse_args(args[1:])
    config = resolve(parsed,
                      model=parsed.model,
                      tracker_name=parsed.tracker_name,
                      workers=parsed.workers)
    print(
        track_all(config, load_sequences(config), model_path(config),
                  config['tracker_name']))


@command('eval')
def evaluate(args):
    """Scores result files against the ground truth."""
    parser = run_parser('eval', evaluate.__doc__)
    parser.add_argument('--tracker-name', help='results folder to score')
    parsed = parser.parse_args(args[1:])
    config = resolve(parsed, tracker_name=parsed.tracker_name)
    name = config['tracker_name']
    print(report_lib.format_table(
        evaluate_results(config, load_sequences(config), name, name)),
          end='')


@command('plot')
def plot(args):
    """Draws precision and success curves of one or more trackers."""
    parser = run_parser('plot', plot.__doc__)
    parser.add_argument('--trackers',
                        help='comma-separated results folders to compare')
    parser.add_argument('--format',
                        action='append',
                        choices=[str(f) for f in curves.CurveFormat],
                        help='output format, repeatable (default: all)')
    parsed = parser.parse_args(args[1:])
    config = resolve(parsed)
    names = [
        n.strip()
        for n in (parsed.trackers or config['tracker_name']).split(',')
        if n.strip()
    ]
    sequences = load_sequences(config)
    reports = [
        report_lib.evaluate(config.out_path(run_config.RESULTS_DIR, name),
                            sequences, name) for name in names
    ]
    curves_dir = config.out_path(run_config.CURVES_DIR)
    for path in curves.emit_curves(reports, curves_dir, parsed.format or
                                   list(curves.CurveFormat)):
        print(path)
    run_config.save(config, curves_dir)

