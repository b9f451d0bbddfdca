import os
import tempfile
import unittest
from unittest import mock

import numpy as np
import torch

from model import architecture
from model import backbone
from model import weights

_DESK = architecture.NetworkSpec(widths=(4, 6, 8))


def random_layer_arrays(rng, spec, level):
    layer = spec.layer(level)
    weight = rng.normal(size=(layer.out_channels, layer.in_channels,
                              layer.kernel, layer.kernel)).astype(np.float32)
    bias = rng.normal(size=layer.out_channels).astype(np.float32)
    return weight, bias


class NpzWeightsTest(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.temp_dir.name, 'weights.npz')

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_unprefixed_arrays_initialize_both_streams(self):
        rng = np.random.default_rng(0)
        arrays = {}
        for level in architecture.LEVELS:
            weight, bias = random_layer_arrays(rng, _DESK, level)
            arrays[f'conv{level}_weight'] = weight
            arrays[f'conv{level}_bias'] = bias
        np.savez(self.path, **arrays)

        model = backbone.Backbone(_DESK)
        weights.load_into(model, weights.read(self.path))
        for modality in backbone.Modality:
            for level in architecture.LEVELS:
                conv = model.layer(modality, level).conv
                np.testing.assert_array_equal(arrays[f'conv{level}_weight'],
                                              conv.weight.detach().numpy())
                np.testing.assert_array_equal(arrays[f'conv{level}_bias'],
                                              conv.bias.detach().numpy())

    def test_prefixed_arrays_of_both_streams_load_identically(self):
        torch.manual_seed(1)
        source = backbone.Backbone(_DESK)
        arrays = {}
        for modality in backbone.Modality:
            for level in architecture.LEVELS:
                conv = source.layer(modality, level).conv
                arrays[f'{modality}/conv{level}_weight'] = (
                    conv.weight.detach().numpy())
                arrays[f'{modality}/conv{level}_bias'] = (
                    conv.bias.detach().numpy())
        np.savez(self.path, **arrays)
        target = backbone.Backbone(_DESK)
        weights.load_into(target, weights.read(self.path))
        for name, value in source.state_dict().items():
            self.assertTrue(torch.equal(value, target.state_dict()[name]),
                            name)

    def test_prefixed_arrays_override_shared_ones(self):
        rng = np.random.default_rng(2)
        weight, bias = random_layer_arrays(rng, _DESK, 1)
        tir_weight = weight + 1.0
        np.savez(self.path,
                 conv1_weight=weight,
                 conv1_bias=bias,
                 **{
                     'tir/conv1_weight': tir_weight,
                     'tir/conv1_bias': bias
                 })
        tensors = weights.read(self.path)
        np.testing.assert_array_equal(weight,
                                      tensors[(backbone.Modality.RGB, 1)][0])
        np.testing.assert_array_equal(tir_weight,
                                      tensors[(backbone.Modality.TIR, 1)][0])
        self.assertNotIn((backbone.Modality.RGB, 2), tensors)

    def test_shape_mismatch_raises(self):
        np.savez(self.path,
                 conv1_weight=np.zeros((5, 3, 7, 7), dtype=np.float32),
                 conv1_bias=np.zeros(5, dtype=np.float32))
        with self.assertRaises(weights.WeightShapeError):
            weights.load_into(backbone.Backbone(_DESK),
                              weights.read(self.path))

    def test_file_without_convolutions_raises(self):
        np.savez(self.path, something_else=np.zeros(3))
        with self.assertRaises(weights.WeightFileError):
            weights.read(self.path)

    def test_missing_file_raises(self):
        with self.assertRaises(weights.WeightFileError):
            weights.read(os.path.join(self.temp_dir.name, 'missing.npz'))


class MatWeightsTest(unittest.TestCase):

    def test_reads_matconvnet_layout_into_both_streams(self):
        rng = np.random.default_rng(3)
        layers = [{} for _ in range(9)]
        expected = {}
        for level in architecture.LEVELS:
            weight, bias = random_layer_arrays(rng, _DESK, level)
            expected[level] = weight
            packed = np.empty((1, 1), dtype=object)
            packed[0, 0] = ((np.transpose(weight, (2, 3, 1, 0)),
                             bias[:, np.newaxis]),)
            layers[(level - 1) * 4] = {'weights': packed}
        with mock.patch('scipy.io.loadmat', return_value={'layers': [layers]}):
            tensors = weights.read('imagenet-vgg-m.mat')
        for modality in backbone.Modality:
            for level in architecture.LEVELS:
                np.testing.assert_array_equal(expected[level],
                                              tensors[(modality, level)][0])
        model = backbone.Backbone(_DESK)
        weights.load_into(model, tensors)
