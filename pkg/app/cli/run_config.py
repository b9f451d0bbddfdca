"""Resolved settings of one command-line run.

Settings come from three layers, later ones taking precedence:

    1. `_DEFAULTS` below.
    2. An optional plain-text config file with `key=value` lines and `#`
       comments.
    3. `--set key=value` overrides and dedicated flags such as `--seed`.

Typical usage example:

    config = run_config.load('ablation.cfg',
                             run_config.parse_overrides(['variant=sum']))
    spec = config.network_spec()
    run_config.save(config, results_dir)

Training and tracking keys mirror the fields of TrainConfig and
TrackerConfig with a `train_` or `track_` prefix. The single `seed` key
seeds both.
"""
import dataclasses
import logging
import os

import dotenv

import atomic_file
import env
from model import architecture
from training import config as train_config_lib
from tracker import config as tracker_config_lib

logger = logging.getLogger(__name__)

CONFIG_ECHO_FILE = 'config.txt'

RESULTS_DIR = 'results'
REPORTS_DIR = 'reports'
CURVES_DIR = 'curves'
CHECKPOINTS_DIR = 'checkpoints'

_TRAIN_PREFIX = 'train_'
_TRACK_PREFIX = 'track_'
_NET_PREFIX = 'net_'

# Fields that the run-level keys own.
_SHARED_FIELDS = ('seed', 'phase')

_NETWORK_DEFAULTS = {
    key: value
    for key, value in architecture.NetworkSpec().as_dict().items()
    if key not in ('variant', 'sum_reduction')
}

_DEFAULTS = {
    'data_root': env.DATA_ROOT,
    'dataset': 'rgbt234',
    # Comma-separated sequence names; empty selects every sequence.
    'sequences': '',
    'out': env.OUT_DIR,
    'seed': 0,
    'variant': str(architecture.Variant.AGG_ESK),
    'sum_reduction': str(architecture.SumReduction.MEAN),
    'tracker_name': 'EANet',
    # Tracking checkpoint; empty means the phase-2 checkpoint of `variant`.
    'model': '',
    # Optional backbone weights (.npz or .mat) for phase 1.
    'pretrained': '',
    'workers': 1,
    'synth_count': 6,
    'synth_frames': 20,
    # Whether ablate trains the checkpoints it cannot find.
    'ablation_train': True,
}
_DEFAULTS.update(
    {_NET_PREFIX + key: value for key, value in _NETWORK_DEFAULTS.items()})
_DEFAULTS.update({
    _TRAIN_PREFIX + field.name: field.default
    for field in dataclasses.fields(train_config_lib.TrainConfig)
    if field.name not in _SHARED_FIELDS
})
_DEFAULTS.update({
    _TRACK_PREFIX + field.name: field.default
    for field in dataclasses.fields(tracker_config_lib.TrackerConfig)
    if field.name not in _SHARED_FIELDS
})

_TRUE_VALUES = ('1', 'true', 'yes', 'on')
_FALSE_VALUES = ('0', 'false', 'no', 'off')


class Error(Exception):
    pass


class UnknownConfigKeyError(Error):
    pass


class InvalidConfigValueError(Error):
    pass


class LoadConfigError(Error):
    pass


def _convert(key, value):
    """Converts a raw string to the type of the key's default."""
    default = _DEFAULTS[key]
    if not isinstance(value, str):
        return value
    text = value.strip()
    try:
        if isinstance(default, bool):
            if text.lower() in _TRUE_VALUES:
                return True
            if text.lower() in _FALSE_VALUES:
                return False
            raise ValueError(f'not a boolean: {text!r}')
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError as e:
        raise InvalidConfigValueError(f'Invalid value for {key}: {e}') from e
    return text


class RunConfig:

    def __init__(self, data=None):
        data = dict(data or {})
        unknown = sorted(set(data) - set(_DEFAULTS))
        if unknown:
            raise UnknownConfigKeyError(
                f'Unknown configuration keys: {", ".join(unknown)}')
        # Merge the defaults with data, with data taking precedence.
        self._data = {
            **_DEFAULTS,
            **{key: _convert(key, value) for key, value in data.items()}
        }

    def __getitem__(self, key):
        return self._data[key]

    def as_dict(self):
        return dict(self._data)

    def with_overrides(self, overrides):
        """Returns a copy with the given key -> value pairs applied."""
        return RunConfig({**self._data, **overrides})

    @property
    def seed(self):
        return self._data['seed']

    @property
    def variant(self):
        try:
            return architecture.Variant(self._data['variant'])
        except ValueError as e:
            raise InvalidConfigValueError(
                f'Unknown variant {self._data["variant"]!r}.') from e

    @property
    def sequence_names(self):
        """The selected sequence names, or None for all of them."""
        names = [n.strip() for n in self._data['sequences'].split(',')]
        names = [n for n in names if n]
        return names or None

    def network_spec(self):
        try:
            return architecture.from_dict({
                **{
                    key[len(_NET_PREFIX):]: value
                    for key, value in self._data.items()
                    if key.startswith(_NET_PREFIX)
                }, 'variant': str(self.variant),
                'sum_reduction': self._data['sum_reduction']
            })
        except (architecture.Error, ValueError) as e:
            raise InvalidConfigValueError(
                f'Invalid network settings: {e}') from e

    def train_config(self, phase):
        try:
            return train_config_lib.TrainConfig(phase=phase,
                                                seed=self.seed,
                                                **self._prefixed(_TRAIN_PREFIX))
        except train_config_lib.Error as e:
            raise InvalidConfigValueError(
                f'Invalid training settings: {e}') from e

    def tracker_config(self):
        try:
            return tracker_config_lib.TrackerConfig(
                seed=self.seed, **self._prefixed(_TRACK_PREFIX))
        except tracker_config_lib.Error as e:
            raise InvalidConfigValueError(
                f'Invalid tracking settings: {e}') from e

    def _prefixed(self, prefix):
        return {
            key[len(prefix):]: value
            for key, value in self._data.items()
            if key.startswith(prefix)
        }

    def out_path(self, *parts):
        """Absolute path of an artifact below the `out` folder."""
        return env.abs_path_in_out_dir(self._data['out'], os.path.join(*parts))

    def checkpoint_path(self, name):
        return self.out_path(CHECKPOINTS_DIR, f'{name}.ckpt')


def phase1_checkpoint_name(attribute):
    return f'phase1-{attribute}'


def phase2_checkpoint_name(variant):
    return f'phase2-{variant}'


def parse_overrides(items):
    """Turns ['key=value', ...] into a dict.

    Raises:
        InvalidConfigValueError: If an item has no '='.
    """
    overrides = {}
    for item in items or ():
        key, separator, value = item.partition('=')
        if not separator or not key.strip():
            raise InvalidConfigValueError(
                f'Expected key=value, got {item!r}.')
        overrides[key.strip()] = value
    return overrides


def load(path=None, overrides=None):
    """Builds a RunConfig from an optional file and override dict.

    Raises:
        LoadConfigError: If the file cannot be read.
        UnknownConfigKeyError: If the file or the overrides name a key that
            does not exist.
        InvalidConfigValueError: If a value does not fit its key's type.
    """
    data = {}
    if path:
        if not os.path.isfile(path):
            raise LoadConfigError(f'Config file does not exist: {path}')
        try:
            values = dotenv.dotenv_values(path, interpolate=False)
        except (OSError, UnicodeDecodeError) as e:
            raise LoadConfigError(f'Failed to read config file {path}') from e
        missing = [key for key, value in values.items() if value is None]
        if missing:
            raise InvalidConfigValueError(
                f'Keys without a value in {path}: {", ".join(missing)}')
        data.update(values)
    data.update(overrides or {})
    return RunConfig(data)


def format_text(config):
    """The resolved configuration as sorted key=value lines."""
    return ''.join(f'{key}={value}\n'
                   for key, value in sorted(config.as_dict().items()))


def save(config, directory, filename=CONFIG_ECHO_FILE):
    """Writes the configuration echo into `directory`; returns its path."""
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, filename)
    atomic_file.write_text(path, format_text(config))
    return path
