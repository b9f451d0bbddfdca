import unittest

import torch

from tracker import memory


def _features(value, rows=2):
    return torch.full((rows, 3), float(value))


class SampleMemoryTest(unittest.TestCase):

    def test_oldest_frames_are_evicted_first(self):
        store = memory.SampleMemory(pos_frames=3, neg_frames=2)
        for frame in range(5):
            store.add(frame, _features(frame), _features(-frame))
        self.assertEqual([2, 3, 4], store.positive_frames())
        self.assertEqual([3, 4], store.negative_frames())

    def test_last_selects_the_most_recent_frames(self):
        store = memory.SampleMemory(pos_frames=10, neg_frames=10)
        for frame in range(4):
            store.add(frame, _features(frame), _features(-frame))
        recent = store.positives(last=2)
        self.assertEqual((4, 3), tuple(recent.shape))
        self.assertEqual({2.0, 3.0}, set(recent[:, 0].tolist()))
        self.assertEqual((8, 3), tuple(store.negatives().shape))

    def test_empty_until_both_kinds_are_present(self):
        store = memory.SampleMemory(pos_frames=2, neg_frames=2)
        self.assertTrue(store.is_empty())
        store.add(0, _features(1), torch.zeros((0, 3)))
        self.assertTrue(store.is_empty())
        store.add(1, torch.zeros((0, 3)), _features(2))
        self.assertFalse(store.is_empty())
        self.assertEqual([0], store.positive_frames())
        self.assertEqual([1], store.negative_frames())
