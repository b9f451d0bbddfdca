"""Imports pre-trained convolution weights into the backbone.

Two layouts are understood:

- `.npz` archives with arrays named `conv{1,2,3}_weight` (out, in, k, k) and
  `conv{1,2,3}_bias` (out,). A name may be prefixed with `rgb/` or `tir/` to
  target one stream only; unprefixed arrays initialize both streams.
- VGG-M `.mat` files (MatConvNet layout), where the three convolutions sit at
  layer indices 0, 4 and 8 and weights are stored (k, k, in, out).
"""
import logging

import numpy as np
import torch

from model import architecture
from model import backbone as backbone_lib

logger = logging.getLogger(__name__)


class Error(Exception):
    pass


class WeightFileError(Error):
    pass


class WeightShapeError(Error):
    pass


def read_npz(path):
    """Returns {(modality, level): (weight, bias)} from an .npz archive."""
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as e:
        raise WeightFileError(f'Cannot read weight file {path}: {e}') from e
    with archive:
        names = set(archive.files)
        tensors = {}
        for modality in backbone_lib.Modality:
            for level in architecture.LEVELS:
                pair = _lookup(archive, names, modality, level)
                if pair is not None:
                    tensors[(modality, level)] = pair
    if not tensors:
        raise WeightFileError(f'{path} contains no convolution weights.')
    return tensors


def _lookup(archive, names, modality, level):
    for prefix in (f'{modality}/', ''):
        weight_name = f'{prefix}conv{level}_weight'
        bias_name = f'{prefix}conv{level}_bias'
        if weight_name in names and bias_name in names:
            return archive[weight_name], archive[bias_name]
    return None


def read_mat(path):
    """Returns {(modality, level): (weight, bias)} from a VGG-M .mat file."""
    # Only needed for this layout.
    import scipy.io  # pylint: disable=import-outside-toplevel
    try:
        layers = scipy.io.loadmat(path)['layers'][0]
    except (OSError, ValueError, KeyError) as e:
        raise WeightFileError(f'Cannot read weight file {path}: {e}') from e
    tensors = {}
    for level in architecture.LEVELS:
        weight, bias = layers[(level - 1) * 4]['weights'].item()[0]
        pair = (np.transpose(weight, (3, 2, 0, 1)), bias[:, 0])
        for modality in backbone_lib.Modality:
            tensors[(modality, level)] = pair
    return tensors


def read(path):
    if str(path).endswith('.mat'):
        return read_mat(path)
    return read_npz(path)


def load_into(backbone, tensors):
    """Copies imported weights into a backbone.Backbone.

    Raises:
        WeightShapeError: If an array does not match the layer it targets.
    """
    with torch.no_grad():
        for (modality, level), (weight, bias) in sorted(
                tensors.items(), key=lambda item: (str(item[0][0]),
                                                   item[0][1])):
            conv = backbone.layer(modality, level).conv
            if (tuple(weight.shape) != tuple(conv.weight.shape) or
                    tuple(bias.shape) != tuple(conv.bias.shape)):
                raise WeightShapeError(
                    f'conv{level} ({modality}) expects weight '
                    f'{tuple(conv.weight.shape)} and bias '
                    f'{tuple(conv.bias.shape)}, got {tuple(weight.shape)} and '
                    f'{tuple(bias.shape)}.')
            conv.weight.copy_(torch.from_numpy(np.asarray(weight,
                                                          dtype=np.float32)))
            conv.bias.copy_(torch.from_numpy(np.asarray(bias,
                                                        dtype=np.float32)))
            logger.debug('Loaded conv%d weights into the %s stream', level,
                         modality)
