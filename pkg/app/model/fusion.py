"""Attribute-specific fusion branches and their aggregation.

Every backbone level carries five fusion branches, one per challenge
attribute, and one aggregation module that merges the branch outputs into a
single residual V. V is added to both modality streams between the level's
convolution and its normalization/pooling.
"""
import enum

import torch
from torch import nn
import torch.nn.functional as F

from model import architecture
from model import backbone as backbone_lib
from model import esk

BRANCH_COUNT = 5


class Error(Exception):
    pass


class ShapeMismatchError(Error):
    pass


class BranchCountError(Error):
    pass


class AttributeId(enum.Enum):
    THERMAL_CROSSOVER = 'TC'
    ILLUMINATION_VARIATION = 'IV'
    SCALE_VARIATION = 'SV'
    OCCLUSION = 'OCC'
    FAST_MOTION = 'FM'

    def __str__(self):
        return str(self.value)

    @property
    def index(self):
        return list(AttributeId).index(self)


class FusionBranch(nn.Module):
    """Fuses the RGB and TIR feature maps of one level for one attribute.

    concat(rgb, tir) -> conv 5x5 (pad 2) -> ReLU -> conv 4x4 (pad 1/2),
    followed by ESK selection between the pre- and post-4x4 maps.
    """

    def __init__(self, channels, spec, spatial_kernel=None):
        super().__init__()
        self.conv5 = nn.Conv2d(2 * channels, channels, kernel_size=5, padding=2)
        self.conv4 = nn.Conv2d(channels, channels, kernel_size=4)
        self.esk = esk.EskSelect(channels,
                                 2,
                                 reduction=spec.esk_reduction,
                                 min_width=spec.esk_min_width,
                                 spatial_kernel=(spatial_kernel or
                                                 spec.esk_spatial_kernel))

    def forward(self, rgb_feat, tir_feat):
        if rgb_feat.shape != tir_feat.shape:
            raise ShapeMismatchError(
                f'RGB features {tuple(rgb_feat.shape)} and TIR features '
                f'{tuple(tir_feat.shape)} differ in shape.')
        hidden = F.relu(self.conv5(torch.cat([rgb_feat, tir_feat], dim=1)))
        # An even kernel needs asymmetric padding to preserve the size.
        refined = self.conv4(F.pad(hidden, (1, 2, 1, 2)))
        selected, _, _ = self.esk([hidden, refined])
        return selected


class EskAggregation(nn.Module):
    """Adaptive ESK selection across the five branch outputs."""

    def __init__(self, channels, spec, spatial_kernel=None):
        super().__init__()
        self.esk = esk.EskSelect(channels,
                                 BRANCH_COUNT,
                                 reduction=spec.esk_reduction,
                                 min_width=spec.esk_min_width,
                                 spatial_kernel=(spatial_kernel or
                                                 spec.esk_spatial_kernel))

    def forward(self, branch_outputs):
        _check_branch_count(branch_outputs)
        selected, _, _ = self.esk(branch_outputs)
        return selected


class SumAggregation(nn.Module):
    """Parameter-free element-wise combination of the branch outputs."""

    def __init__(self, reduction=architecture.SumReduction.MEAN):
        super().__init__()
        self.reduction = architecture.SumReduction(reduction)

    def forward(self, branch_outputs):
        _check_branch_count(branch_outputs)
        total = torch.stack(list(branch_outputs), dim=0).sum(dim=0)
        if self.reduction == architecture.SumReduction.MEAN:
            return total / BRANCH_COUNT
        return total


class FusionLevel(nn.Module):
    """The five branches and the aggregation of one backbone level."""

    def __init__(self, spec, level):
        super().__init__()
        channels = spec.widths[level - 1]
        kernel = spec.spatial_kernel(level)
        self.branches = nn.ModuleList(
            [FusionBranch(channels, spec, kernel) for _ in AttributeId])
        if spec.variant == architecture.Variant.AGG_ESK:
            self.aggregation = EskAggregation(channels, spec, kernel)
        else:
            self.aggregation = SumAggregation(spec.sum_reduction)

    def forward(self, rgb_conv, tir_conv, attribute=None):
        """Computes the level's residual V.

        Args:
            rgb_conv: RGB convolution output, (N, C, H, W).
            tir_conv: TIR convolution output, (N, C, H, W).
            attribute: When set, only that attribute's branch runs and its
                output is the residual (single-branch training mode).

        Returns:
            The residual tensor, (N, C, H, W).
        """
        if attribute is not None:
            return self.branches[AttributeId(attribute).index](rgb_conv,
                                                               tir_conv)
        return self.aggregation(
            [branch(rgb_conv, tir_conv) for branch in self.branches])


def _check_branch_count(branch_outputs):
    if len(branch_outputs) != BRANCH_COUNT:
        raise BranchCountError(
            f'Expected {BRANCH_COUNT} branch outputs, got '
            f'{len(branch_outputs)}.')


def branch_forward(rgb_feat, tir_feat, branch):
    return branch(rgb_feat, tir_feat)


def aggregate(branch_outputs, aggregation):
    return aggregation(branch_outputs)


def fused_layer_forward(rgb_in, tir_in, level, backbone, fusion_levels,
                        attribute=None):
    """Runs one backbone level with the fusion residual added.

    Args:
        rgb_in: RGB input of the level, (N, C_in, H, W).
        tir_in: TIR input of the level, (N, C_in, H, W).
        level: Backbone level, 1, 2 or 3.
        backbone: The backbone.Backbone holding both streams.
        fusion_levels: A sequence of the three FusionLevel modules.
        attribute: Optional AttributeId for single-branch mode.

    Returns:
        A tuple (rgb_out, tir_out).
    """
    rgb_layer = backbone.layer(backbone_lib.Modality.RGB, level)
    tir_layer = backbone.layer(backbone_lib.Modality.TIR, level)
    rgb_conv = rgb_layer.convolve(rgb_in)
    tir_conv = tir_layer.convolve(tir_in)
    residual = fusion_levels[level - 1](rgb_conv, tir_conv, attribute)
    return (rgb_layer.reduce(rgb_conv + residual),
            tir_layer.reduce(tir_conv + residual))
