"""Enhanced selective-kernel (ESK) attention.

Selects, per channel and per location, between M candidate feature maps of
identical shape:

- Channel attention (selective-kernel style): the candidates are summed,
  globally average-pooled, squeezed through a shared reduce layer and
  expanded again by one head per candidate. A softmax across the M heads
  gives one weight per candidate and channel.
- Spatial attention: every candidate is pooled over its channels into a
  [mean; max] map, passed through a shared 7x7 convolution, and a softmax
  across the M candidates gives one weight per candidate and location.

The two weights are multiplied and renormalized across candidates, so the
selection is a convex combination of the candidates at every element and
identical candidates select their common value.
"""
import torch
from torch import nn
import torch.nn.functional as F


class Error(Exception):
    pass


class CandidateCountError(Error):
    pass


class CandidateShapeError(Error):
    pass


def reduced_width(channels, reduction, min_width):
    return max(channels // reduction, min_width, 1)


class EskSelect(nn.Module):

    def __init__(self,
                 channels,
                 candidates,
                 reduction=16,
                 min_width=4,
                 spatial_kernel=7):
        super().__init__()
        if candidates < 2:
            raise CandidateCountError('ESK selection needs at least two '
                                      'candidates.')
        self.channels = channels
        self.candidates = candidates
        width = reduced_width(channels, reduction, min_width)
        self.reduce = nn.Linear(channels, width, bias=False)
        self.expand = nn.ModuleList([
            nn.Linear(width, channels, bias=False) for _ in range(candidates)
        ])
        self.spatial = nn.Conv2d(2,
                                 1,
                                 kernel_size=spatial_kernel,
                                 padding=spatial_kernel // 2,
                                 bias=False)

    def forward(self, candidates):
        """Selects across the candidates.

        Args:
            candidates: A sequence of M tensors of shape (N, C, H, W).

        Returns:
            A tuple (selected, channel_weights, spatial_weights) with shapes
            (N, C, H, W), (N, M, C) and (N, M, H, W).
        """
        stacked = self._stack(candidates)
        batch, count, channels, height, width = stacked.shape

        squeezed = stacked.sum(dim=1).mean(dim=(2, 3))
        hidden = F.relu(self.reduce(squeezed))
        channel_logits = torch.stack([head(hidden) for head in self.expand],
                                     dim=1)
        channel_weights = F.softmax(channel_logits, dim=1)

        flat = stacked.reshape(batch * count, channels, height, width)
        pooled = torch.cat([
            flat.mean(dim=1, keepdim=True),
            flat.amax(dim=1, keepdim=True),
        ],
                           dim=1)
        spatial_logits = self.spatial(pooled).reshape(batch, count, height,
                                                      width)
        spatial_weights = F.softmax(spatial_logits, dim=1)

        # The renormalized product of both softmaxes, formed from the summed
        # logits so that opposite saturations cannot underflow to 0/0.
        joint = F.softmax(channel_logits[:, :, :, None, None] +
                          spatial_logits[:, :, None, :, :],
                          dim=1)
        selected = (joint * stacked).sum(dim=1)
        return selected, channel_weights, spatial_weights

    def _stack(self, candidates):
        candidates = list(candidates)
        if len(candidates) < 2:
            raise CandidateCountError(
                f'ESK selection needs at least two candidates, got '
                f'{len(candidates)}.')
        if len(candidates) != self.candidates:
            raise CandidateCountError(
                f'Expected {self.candidates} candidates, got '
                f'{len(candidates)}.')
        shape = candidates[0].shape
        if any(c.shape != shape for c in candidates):
            raise CandidateShapeError(
                'All candidates must share one shape, got '
                f'{[tuple(c.shape) for c in candidates]}.')
        if shape[1] != self.channels:
            raise CandidateShapeError(
                f'Expected {self.channels} channels, got {shape[1]}.')
        return torch.stack(candidates, dim=1)


def esk_select(candidates, module):
    """Functional entry point; see EskSelect.forward."""
    return module(candidates)
