"""Frame-tagged feature memory for online model updates.

Positive and negative features are stored per frame. Each kind keeps at most
a fixed number of frames; adding a frame beyond the cap evicts the oldest
one.
"""
import collections
import dataclasses

import torch


@dataclasses.dataclass(frozen=True)
class MemoryEntry:
    frame_index: int
    features: torch.Tensor


class SampleMemory:

    def __init__(self, pos_frames, neg_frames):
        self._positives = collections.deque(maxlen=pos_frames)
        self._negatives = collections.deque(maxlen=neg_frames)

    def add(self, frame_index, pos_features, neg_features):
        if len(pos_features):
            self._positives.append(MemoryEntry(frame_index, pos_features))
        if len(neg_features):
            self._negatives.append(MemoryEntry(frame_index, neg_features))

    def positive_frames(self):
        return [entry.frame_index for entry in self._positives]

    def negative_frames(self):
        return [entry.frame_index for entry in self._negatives]

    def positives(self, last=None):
        """Features of the `last` most recent frames (all when None)."""
        return _concat(self._positives, last)

    def negatives(self, last=None):
        return _concat(self._negatives, last)

    def is_empty(self):
        return not self._positives or not self._negatives


def _concat(entries, last):
    entries = list(entries)
    if last is not None:
        entries = entries[-last:] if last > 0 else []
    if not entries:
        return torch.zeros((0, 0))
    return torch.cat([entry.features for entry in entries], dim=0)
