import io
import os
import tempfile
import unittest
from unittest import mock

from cli import ablation
from cli import commands
from cli import main
from cli import run_config
from model import architecture
from training import checkpoint

_DESK_SETTINGS = {
    'net_widths': '4,6,8',
    'net_fc_width': '16',
    'train_epochs': '1',
    'train_iterations_per_epoch': '2',
    'train_frames_per_batch': '2',
    'train_pos_per_batch': '4',
    'train_neg_per_batch': '8',
    'train_neg_candidates': '16',
    'track_n_candidates': '32',
    'track_n_pos_init': '20',
    'track_n_neg_init': '40',
    'track_init_iterations': '2',
    'track_n_reg': '30',
    'track_n_pos_update': '8',
    'track_n_neg_update': '16',
    'track_update_iterations': '2',
    'track_batch_pos': '8',
    'track_batch_neg': '16',
    'track_batch_neg_candidates': '32',
    'synth_count': '6',
    'synth_frames': '5',
}


class RunAblationTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        # pylint: disable=consider-using-with
        cls.temp_dir = tempfile.TemporaryDirectory()
        cls.settings = dict(_DESK_SETTINGS,
                            data_root=os.path.join(cls.temp_dir.name, 'data'),
                            out=os.path.join(cls.temp_dir.name, 'runs'),
                            seed='2')
        with mock.patch('sys.stdout', io.StringIO()):
            commands.synth(['synth'] + [
                arg for key, value in cls.settings.items()
                for arg in ('--set', f'{key}={value}')
            ])
        cls.config = run_config.load(overrides=cls.settings)
        cls.result = ablation.run_ablation(cls.config)

    @classmethod
    def tearDownClass(cls):
        cls.temp_dir.cleanup()

    def test_both_variants_are_evaluated(self):
        self.assertEqual('Proposed Method', self.result.proposed.tracker_name)
        self.assertEqual('Var-AggESK', self.result.variant.tracker_name)
        for evaluation in (self.result.proposed, self.result.variant):
            with self.subTest(tracker=evaluation.tracker_name):
                self.assertEqual(6, evaluation.overall.n_sequences)
                self.assertEqual(30, evaluation.overall.n_frames)

    def test_aggregation_checkpoint_has_more_parameters(self):
        counts = self.result.parameter_counts
        self.assertGreater(counts[architecture.Variant.AGG_ESK],
                           counts[architecture.Variant.SUM])
        stored = checkpoint.load(
            self.config.checkpoint_path(
                run_config.phase2_checkpoint_name(architecture.Variant.SUM)))
        self.assertEqual(architecture.Variant.SUM, stored.spec.variant)
        self.assertFalse(any('aggregation' in name for name in stored.arrays))

    def test_table_columns(self):
        header = self.result.table.splitlines()[0]
        self.assertIn('Var-AggESK', header)
        self.assertIn('Proposed Method', header)
        self.assertLess(header.index('Var-AggESK'),
                        header.index('Proposed Method'))
        self.assertTrue(self.result.table.splitlines()[-1].startswith('ALL'))
        with open(self.config.out_path('reports', ablation.ABLATION_TABLE),
                  encoding='utf-8') as f:
            self.assertEqual(self.result.table, f.read())

    def test_variants_have_separate_results_and_reports(self):
        for variant in ('agg-esk', 'sum'):
            with self.subTest(variant=variant):
                self.assertTrue(
                    os.path.isdir(self.config.out_path('results', variant)))
                self.assertTrue(
                    os.path.isfile(
                        self.config.out_path('reports', variant,
                                             'report.csv')))

    def test_rerun_reuses_existing_checkpoints(self):
        config = self.config.with_overrides({'ablation_train': 'false'})
        with mock.patch.object(commands,
                               'train_branch',
                               side_effect=AssertionError('retrained')):
            rerun = ablation.run_ablation(config)
        self.assertEqual(self.result.table, rerun.table)

    def test_missing_checkpoint_without_training(self):
        config = self.config.with_overrides({
            'ablation_train': 'false',
            'out': os.path.join(self.temp_dir.name, 'fresh')
        })
        with self.assertRaises(ablation.MissingAblationCheckpointError):
            ablation.run_ablation(config)

    def test_ablate_subcommand(self):
        stdout = io.StringIO()
        with mock.patch('sys.stdout', stdout), mock.patch(
                'sys.stderr', io.StringIO()):
            exit_code = main.dispatch(['ablate'] + [
                arg for key, value in self.settings.items()
                for arg in ('--set', f'{key}={value}')
            ])
        self.assertEqual(main.EXIT_SUCCESS, exit_code)
        self.assertEqual(self.result.table, stdout.getvalue())
