"""Atomic writes for result files, reports, curves and checkpoints.

Content goes to a hidden temporary file next to the destination, which
replaces the destination only after the caller has written everything, so a
concurrent reader never sees a partial artifact.
"""
import contextlib
import errno
import logging
import os
import shutil
import tempfile

logger = logging.getLogger(__name__)

# Folder for the temporary files. `None` means the destination's folder.
# Only patched in tests.
_TEMP_FOLDER = None


@contextlib.contextmanager
def create(file_path, chmod_mode=0o644):
    """Creates or replaces a file atomically.

    Args:
        file_path: Destination path (str or path-like).
        chmod_mode: File permissions as bitfield, as used by `os.chmod`.

    Raises:
        OSError if disk operations fail.

    Returns:
        A binary stream that can be written into.
    """
    directory = _TEMP_FOLDER or os.path.dirname(os.path.abspath(file_path))
    file_descriptor, temp_file = tempfile.mkstemp(dir=directory,
                                                  prefix='.',
                                                  suffix='.partial')
    try:
        with os.fdopen(file_descriptor, 'wb') as file:
            yield file
        os.chmod(temp_file, chmod_mode)
        shutil.move(temp_file, file_path)
    finally:
        _remove_if_exists(temp_file)


def write_text(file_path, text, chmod_mode=0o644):
    with create(file_path, chmod_mode) as file:
        file.write(text.encode('utf-8'))


def _remove_if_exists(file_path):
    try:
        os.remove(file_path)
    except OSError as e:
        if e.errno != errno.ENOENT:
            logger.warning('Unexpected error while removing file: %s', str(e))
