"""Entrypoint of the eanet command-line tool.

Exit codes: 0 on success, 1 on usage errors (unknown subcommand, bad flags,
unknown or invalid configuration keys), 2 on data errors (missing or
malformed datasets, checkpoints or result files).
"""
# Load the logging configuration before any other local imports.
import log  # noqa: I001

import logging
import sys

import cli.ablation  # noqa: F401
import cli.commands  # noqa: F401
import cli.registry
import env
import execute
from cli import run_config
from dataset import annotations
from dataset import attributes
from dataset import loaders
from dataset import sequence
from dataset import synth
from dataset import writer
from evaluation import curves
from evaluation import metrics
from evaluation import report
from geometry import box
from geometry import regressor
from geometry import sampling
from model import architecture
from model import backbone
from model import esk
from model import fusion
from model import head
from model import patch
from model import weights
from training import checkpoint
from training import minibatch
from training import optimizer
from training import phases
from tracker import result_file
from tracker import tracker

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_USAGE_ERRORS = (cli.registry.Error, run_config.Error)

_DATA_ERRORS = (
    OSError,
    env.Error,
    execute.Error,
    annotations.Error,
    attributes.Error,
    loaders.Error,
    sequence.Error,
    synth.Error,
    writer.Error,
    curves.Error,
    metrics.Error,
    report.Error,
    box.Error,
    regressor.Error,
    sampling.Error,
    architecture.Error,
    backbone.Error,
    esk.Error,
    fusion.Error,
    head.Error,
    patch.Error,
    weights.Error,
    checkpoint.Error,
    minibatch.Error,
    optimizer.Error,
    phases.Error,
    result_file.Error,
    tracker.Error,
    cli.ablation.Error,
)


def dispatch(argv):
    """Runs the subcommand named by argv[0]; returns the exit code."""
    if not argv:
        print('Missing required subcommand!', file=sys.stderr)
        print(cli.registry.usage(), file=sys.stderr, end='')
        return EXIT_USAGE

    try:
        command = cli.registry.COMMANDS[argv[0]]
    except KeyError:
        print('No such subcommand!', file=sys.stderr)
        print(cli.registry.usage(), file=sys.stderr, end='')
        return EXIT_USAGE

    try:
        command(argv)
    except _USAGE_ERRORS as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as e:
        logger.error('%s failed: %s', argv[0], e)
        return EXIT_DATA
    except SystemExit as e:
        # --help
        return EXIT_SUCCESS if e.code is None else int(e.code)
    return EXIT_SUCCESS


def main():
    log.create_root_logger(logging.StreamHandler())
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
