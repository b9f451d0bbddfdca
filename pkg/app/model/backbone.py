"""The two parallel VGG-M style convolution streams.

Each modality (RGB, TIR) has its own three convolution layers; the streams
share no parameters. A layer is split into `convolve` (convolution + ReLU)
and `reduce` (LRN + max-pool where the level has them), because the fusion
residual is added between those two steps.
"""
import enum

from torch import nn
import torch.nn.functional as F

from model import architecture


class Error(Exception):
    pass


class ChannelMismatchError(Error):
    pass


class SpatialSizeError(Error):
    pass


class Modality(enum.Enum):
    RGB = 'rgb'
    TIR = 'tir'

    def __str__(self):
        return str(self.value)


def convolve(inputs, layer, weight, bias):
    """Valid convolution followed by ReLU.

    Raises:
        ChannelMismatchError: If the input channels do not match the layer.
        SpatialSizeError: If the input is smaller than the kernel.
    """
    if inputs.shape[-3] != layer.in_channels:
        raise ChannelMismatchError(
            f'Layer expects {layer.in_channels} input channels, got '
            f'{inputs.shape[-3]}.')
    if min(inputs.shape[-2:]) < layer.kernel:
        raise SpatialSizeError(
            f'Input of size {tuple(inputs.shape[-2:])} is smaller than the '
            f'{layer.kernel}x{layer.kernel} kernel.')
    return F.relu(F.conv2d(inputs, weight, bias, stride=layer.stride))


def reduce(inputs, layer, lrn_size=2):
    """Applies the level's local response normalization and 3x3/2 pooling."""
    if layer.normalized:
        inputs = F.local_response_norm(inputs, lrn_size)
    if layer.pooled:
        inputs = F.max_pool2d(inputs, kernel_size=3, stride=2)
    return inputs


def conv_layer_forward(inputs, layer, params, lrn_size=2):
    """Runs one complete backbone layer.

    Args:
        inputs: A tensor of shape (N, C, H, W).
        layer: The layer's architecture.ConvLayerSpec.
        params: A mapping with 'weight' and 'bias' tensors.
        lrn_size: Neighborhood size of the local response normalization.

    Returns:
        The layer output tensor.
    """
    return reduce(convolve(inputs, layer, params['weight'], params['bias']),
                  layer, lrn_size)


class ConvLayer(nn.Module):

    def __init__(self, layer, lrn_size=2):
        super().__init__()
        self.layer = layer
        self.lrn_size = lrn_size
        self.conv = nn.Conv2d(layer.in_channels,
                              layer.out_channels,
                              kernel_size=layer.kernel,
                              stride=layer.stride)

    def convolve(self, inputs):
        return convolve(inputs, self.layer, self.conv.weight, self.conv.bias)

    def reduce(self, inputs):
        return reduce(inputs, self.layer, self.lrn_size)

    def forward(self, inputs):
        return self.reduce(self.convolve(inputs))


class Stream(nn.Module):
    """The three convolution layers of one modality."""

    def __init__(self, spec):
        super().__init__()
        self.layers = nn.ModuleList([
            ConvLayer(spec.layer(level), spec.lrn_size)
            for level in architecture.LEVELS
        ])

    def forward(self, patches):
        outputs = []
        for layer in self.layers:
            patches = layer(patches)
            outputs.append(patches)
        return outputs


class Backbone(nn.Module):

    def __init__(self, spec):
        super().__init__()
        self.streams = nn.ModuleDict({
            str(Modality.RGB): Stream(spec),
            str(Modality.TIR): Stream(spec),
        })

    def stream(self, modality):
        return self.streams[str(Modality(modality))]

    def layer(self, modality, level):
        return self.stream(modality).layers[level - 1]


def stream_forward(patches, modality, backbone):
    """Runs one modality's stream and returns the three layer outputs."""
    return backbone.stream(modality)(patches)

