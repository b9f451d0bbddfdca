"""The complete two-stream network with attribute-based fusion."""
import logging

import torch
from torch import nn

from model import architecture
from model import backbone as backbone_lib
from model import fusion
from model import head as head_lib

logger = logging.getLogger(__name__)

# Upper bound on the number of samples pushed through the network at once.
DEFAULT_CHUNK = 256

BACKBONE_PREFIX = 'backbone.'
FC_PREFIXES = ('head.fc4.', 'head.fc5.', 'head.fc6.')


def branch_prefix(attribute):
    """Parameter name prefixes of one attribute's branches on every level."""
    index = fusion.AttributeId(attribute).index
    return tuple(f'fusion.{level - 1}.branches.{index}.'
                 for level in architecture.LEVELS)


def aggregation_prefixes():
    return tuple(f'fusion.{level - 1}.aggregation.'
                 for level in architecture.LEVELS)


class EANet(nn.Module):
    """Backbone + per-level fusion + multi-domain head.

    Parameters are initialized from `seed` without disturbing the global
    torch random state.
    """

    def __init__(self, spec=None, domains=1, seed=0):
        super().__init__()
        self.spec = spec or architecture.NetworkSpec()
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            self.backbone = backbone_lib.Backbone(self.spec)
            self.fusion = nn.ModuleList([
                fusion.FusionLevel(self.spec, level)
                for level in architecture.LEVELS
            ])
            self.head = head_lib.Head(self.spec.feature_dim,
                                      width=self.spec.fc_width,
                                      domains=domains,
                                      dropout=self.spec.dropout)

    def extract(self, rgb_patches, tir_patches, attribute=None):
        """Returns the fused conv3 maps (rgb3, tir3)."""
        rgb, tir = rgb_patches, tir_patches
        for level in architecture.LEVELS:
            rgb, tir = fusion.fused_layer_forward(rgb, tir, level,
                                                  self.backbone, self.fusion,
                                                  attribute)
        return rgb, tir

    def features(self, rgb_patches, tir_patches, attribute=None):
        """Returns the (N, feature_dim) input of the FC stack."""
        return head_lib.flatten_features(
            *self.extract(rgb_patches, tir_patches, attribute))

    def forward(self, rgb_patches, tir_patches, domain=0, attribute=None):
        return self.head(self.features(rgb_patches, tir_patches, attribute),
                         domain)

    def features_in_chunks(self,
                           rgb_patches,
                           tir_patches,
                           attribute=None,
                           chunk=DEFAULT_CHUNK):
        """Gradient-free feature extraction over a large batch."""
        outputs = []
        with torch.no_grad():
            for start in range(0, len(rgb_patches), chunk):
                outputs.append(
                    self.features(rgb_patches[start:start + chunk],
                                  tir_patches[start:start + chunk],
                                  attribute))
        if not outputs:
            return torch.zeros((0, self.spec.feature_dim))
        return torch.cat(outputs, dim=0)

    def set_trainable(self, prefixes):
        """Enables gradients exactly for parameters under `prefixes`."""
        prefixes = tuple(prefixes)
        for name, parameter in self.named_parameters():
            parameter.requires_grad_(name.startswith(prefixes))

    def trainable_parameters(self):
        return [p for p in self.parameters() if p.requires_grad]

    def parameter_count(self, include_domains=True):
        total = 0
        for name, parameter in self.named_parameters():
            if not include_domains and name.startswith('head.fc6.'):
                continue
            total += parameter.numel()
        return total
