import unittest
from unittest import mock

import numpy as np

from dataset import synth
from model import architecture
from model import fusion
from model import head
from model import network
from training import checkpoint
from training import config
from training import phases

_DESK = architecture.NetworkSpec(widths=(4, 6, 8), fc_width=16)

_QUICK = config.TrainConfig(epochs=1,
                            iterations_per_epoch=4,
                            frames_per_batch=2,
                            pos_per_batch=4,
                            neg_per_batch=8,
                            neg_candidates=16,
                            log_every=2)


def _occluded_sequences(count=2, frames=4):
    return [
        synth.synth_sequence(
            synth.SynthSpec(name=f'occ-{i}',
                            frames=frames,
                            occlusion=(1, 2),
                            occlusion_fraction=0.6,
                            seed=i)) for i in range(count)
    ]


def _phase1_checkpoints(spec=_DESK):
    # Stand-ins for trained phase-1 output: one differently seeded network
    # per attribute.
    return {
        attribute: checkpoint.from_network(
            network.EANet(spec, domains=1, seed=10 + attribute.index),
            {'attribute': str(attribute)})
        for attribute in fusion.AttributeId
    }


def _initial_state(spec, domains, seed):
    return checkpoint.from_network(network.EANet(spec, domains, seed)).arrays


class DomainScheduleTest(unittest.TestCase):

    def test_every_cycle_visits_every_domain_once(self):
        order = phases.domain_schedule(3, 9, np.random.default_rng(0))
        self.assertEqual(9, len(order))
        for start in range(0, 9, 3):
            self.assertEqual([0, 1, 2], sorted(order[start:start + 3]))


class TrainPhase1Test(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.sequences = _occluded_sequences()
        cls.result = phases.train_phase1(fusion.AttributeId.OCCLUSION,
                                         cls.sequences, _QUICK, _DESK)

    def test_only_the_attribute_branch_and_fc_layers_change(self):
        before = _initial_state(_DESK, 2, _QUICK.seed)
        trained = network.branch_prefix(
            fusion.AttributeId.OCCLUSION) + network.FC_PREFIXES
        changed = set()
        for name, array in self.result.arrays.items():
            if not np.array_equal(before[name], array):
                changed.add(name)
                self.assertTrue(name.startswith(trained), name)
        self.assertTrue(any(n.startswith('fusion.') for n in changed))
        self.assertTrue(any(n.startswith('head.fc4.') for n in changed))

    def test_keeps_one_domain_per_sequence(self):
        self.assertEqual(2, self.result.domains)
        self.assertEqual(1, self.result.metadata['phase'])
        self.assertEqual('OCC', self.result.metadata['attribute'])
        self.assertEqual(['occ-0', 'occ-1'], self.result.metadata['sequences'])

    def test_same_seed_gives_the_same_checkpoint(self):
        again = phases.train_phase1(fusion.AttributeId.OCCLUSION,
                                    self.sequences, _QUICK, _DESK)
        self.assertEqual(checkpoint.content_hash(self.result),
                         checkpoint.content_hash(again))

    def test_reports_every_iteration(self):
        losses = []
        phases.train_phase1('OCC',
                            self.sequences,
                            _QUICK,
                            _DESK,
                            on_iteration=lambda i, loss: losses.append(loss))
        self.assertEqual(4, len(losses))
        self.assertTrue(all(np.isfinite(losses)))

    def test_logs_accuracy_and_precision(self):
        with self.assertLogs('training.phases', level='INFO') as logs:
            phases.train_phase1('OCC', self.sequences, _QUICK, _DESK)
        progress = [line for line in logs.output if 'Iteration' in line]
        # log_every=2 over 4 iterations.
        self.assertEqual(2, len(progress))
        for line in progress:
            self.assertRegex(line, r'accuracy \d\.\d{3}, precision \d\.\d{3}')

    def test_loss_goes_through_the_shared_loss_function(self):
        with mock.patch.object(phases.head_lib,
                               'bce_loss',
                               wraps=head.bce_loss) as mock_loss:
            phases.train_phase1('OCC', self.sequences, _QUICK, _DESK)
        self.assertEqual(4, mock_loss.call_count)

    def test_rejects_empty_data(self):
        with self.assertRaises(phases.EmptyDataError):
            phases.train_phase1(fusion.AttributeId.OCCLUSION, [], _QUICK,
                                _DESK)

    def test_rejects_sequences_without_the_attribute(self):
        plain = synth.synth_sequence(synth.SynthSpec(name='plain', frames=4))
        with self.assertRaises(phases.AttributeMismatchError):
            phases.train_phase1(fusion.AttributeId.OCCLUSION,
                                self.sequences + [plain], _QUICK, _DESK)


class OverfitTest(unittest.TestCase):

    def test_loss_falls_on_two_synthetic_sequences(self):
        spec = architecture.NetworkSpec(widths=(8, 16, 32),
                                        fc_width=64,
                                        dropout=0.0)
        settings = config.TrainConfig(epochs=2,
                                      iterations_per_epoch=100,
                                      lr_new=1e-2,
                                      frames_per_batch=4,
                                      pos_per_batch=16,
                                      neg_per_batch=48,
                                      neg_candidates=48,
                                      pos_iou=0.8,
                                      neg_iou=0.3,
                                      log_every=50)
        losses = []
        phases.train_phase1(fusion.AttributeId.OCCLUSION,
                            _occluded_sequences(frames=6),
                            settings,
                            spec,
                            on_iteration=lambda i, loss: losses.append(loss))
        moving = np.convolve(losses, np.ones(10) / 10, mode='valid')
        self.assertLess(moving[40], moving[0])
        self.assertLess(moving.min(), 0.05)


class TrainPhase2Test(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.sequences = _occluded_sequences(count=3)
        cls.branches = _phase1_checkpoints()
        cls.result = phases.train_phase2(cls.sequences, cls.branches, _QUICK)

    def test_branches_stay_bit_identical(self):
        for attribute, source in self.branches.items():
            for name, array in source.subset(
                    network.branch_prefix(attribute)).items():
                np.testing.assert_array_equal(array, self.result.arrays[name])

    def test_backbone_comes_from_the_phase1_checkpoints(self):
        source = self.branches[fusion.AttributeId.THERMAL_CROSSOVER]
        for name, array in source.subset((network.BACKBONE_PREFIX,)).items():
            np.testing.assert_array_equal(array, self.result.arrays[name])

    def test_aggregation_is_trained(self):
        before = _initial_state(_DESK, 3, _QUICK.seed)
        delta = sum(
            float(np.abs(self.result.arrays[name] - before[name]).sum())
            for name in self.result.arrays
            if name.startswith(network.aggregation_prefixes()))
        self.assertGreater(delta, 0.0)

    def test_fc6_bank_is_dropped(self):
        self.assertEqual(0, self.result.domains)
        self.assertEqual(3, self.result.metadata['fc6_domains'])
        self.assertEqual(2, self.result.metadata['phase'])

    def test_missing_branch_checkpoint_is_an_error(self):
        partial = dict(self.branches)
        del partial[fusion.AttributeId.FAST_MOTION]
        with self.assertRaises(phases.MissingBranchCheckpointError):
            phases.train_phase2(self.sequences, partial, _QUICK)

    def test_sum_variant_has_no_aggregation_parameters(self):
        result = phases.train_phase2(self.sequences,
                                     self.branches,
                                     _QUICK,
                                     variant=architecture.Variant.SUM)
        self.assertEqual('sum', result.metadata['variant'])
        self.assertFalse(any('aggregation' in n for n in result.arrays))
        self.assertGreater(self.result.parameter_count(),
                           result.parameter_count())
