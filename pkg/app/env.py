import os

import dotenv

_config = dotenv.dotenv_values('.env')

# Folder that holds the dataset when a command names none.
DATA_ROOT = os.environ.get('EANET_DATA_ROOT',
                           _config.get('EANET_DATA_ROOT', 'data'))

# Folder that receives results, reports, curves and checkpoints.
OUT_DIR = os.environ.get('EANET_OUT_DIR', _config.get('EANET_OUT_DIR', 'runs'))


class Error(Exception):
    pass


class PathNotRelativeToOutDirectoryError(Error):
    pass


def abs_path_in_out_dir(out_dir, relative_path):
    """Resolves the absolute path of an artifact inside an output folder.

    Args:
        out_dir: The output folder of a run.
        relative_path: The artifact's path relative to `out_dir`, without
            leading slash (as string).

    Raises:
        ValueError if input path has leading slash (i.e., is absolute).
        PathNotRelativeToOutDirectoryError if resolved path would be outside
            the output folder.

    Returns:
        The eventual, absolute path (as string).
    """
    if relative_path.startswith('/'):
        raise ValueError('Input path must not start with slash.')
    base = os.path.realpath(out_dir)
    target = os.path.realpath(os.path.join(base, relative_path))
    if os.path.commonpath([base, target]) != base:
        raise PathNotRelativeToOutDirectoryError(
            'Resolved path must be inside the output directory.')
    return target
