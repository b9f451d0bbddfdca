"""Contains the configuration for our logging setup.

The file that contains the `main` function must load this module before any
of the other local imports.
"""
import logging
import os


def create_root_logger(handler):
    """Creates a pre-configured root logger.

    It sets up the logger with custom formatting and attaches the provided
    handler. The level is INFO, or DEBUG when the DEBUG environment variable
    is set.

    Args:
        handler: The log handler that shall be used (type `logging.Handler`).

    Returns:
        A logger object of type `logging.Logger`.
    """
    handler.setFormatter(
        logging.Formatter(
            '%(asctime)s.%(msecs)03d %(name)-15s %(levelname)-4s %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'))

    root_logger = logging.getLogger()
    root_logger.addHandler(handler)
    root_logger.setLevel(logging.DEBUG if os.environ.get('DEBUG') else
                         logging.INFO)

    return root_logger


def log_config(logger, title, settings):
    """Logs a resolved key=value configuration, one key per line."""
    logger.info('%s:', title)
    for key in sorted(settings):
        logger.info('  %s=%s', key, settings[key])
