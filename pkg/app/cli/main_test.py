import contextlib
import io
import unittest
from unittest import mock

from cli import main
from cli import registry


@contextlib.contextmanager
def captured_output():
    """Captures stdout and stderr to keep the test output clean."""
    stdout, stderr = io.StringIO(), io.StringIO()
    with mock.patch('sys.stdout', stdout), mock.patch('sys.stderr', stderr):
        yield stdout, stderr


class DispatchTest(unittest.TestCase):

    def test_no_arguments_prints_usage(self):
        with captured_output() as (_, stderr):
            self.assertEqual(main.EXIT_USAGE, main.dispatch([]))
        self.assertIn('Missing required subcommand!', stderr.getvalue())
        self.assertIn('Usage: eanet <subcommand>', stderr.getvalue())

    def test_unknown_subcommand_prints_usage(self):
        with captured_output() as (_, stderr):
            self.assertEqual(main.EXIT_USAGE, main.dispatch(['fly']))
        self.assertIn('No such subcommand!', stderr.getvalue())

    def test_usage_lists_every_subcommand(self):
        text = registry.usage()
        for name in ('ablate', 'eval', 'plot', 'synth', 'track',
                     'train-phase1', 'train-phase2'):
            with self.subTest(name=name):
                self.assertIn(f'  {name}', text)

    def test_bad_flag_is_a_usage_error(self):
        with captured_output():
            self.assertEqual(main.EXIT_USAGE,
                             main.dispatch(['track', '--no-such-flag']))

    def test_missing_required_flag_is_a_usage_error(self):
        with captured_output():
            self.assertEqual(main.EXIT_USAGE, main.dispatch(['train-phase1']))

    def test_unknown_config_key_is_a_usage_error(self):
        with captured_output() as (_, stderr):
            self.assertEqual(
                main.EXIT_USAGE,
                main.dispatch(['eval', '--set', 'learning_rate=0.1']))
        self.assertIn('learning_rate', stderr.getvalue())

    def test_missing_dataset_is_a_data_error(self):
        with captured_output():
            self.assertEqual(
                main.EXIT_DATA,
                main.dispatch(
                    ['eval', '--data-root', '/nonexistent/eanet-data']))

    def test_help_exits_successfully(self):
        with captured_output() as (stdout, _):
            self.assertEqual(main.EXIT_SUCCESS,
                             main.dispatch(['track', '--help']))
        self.assertIn('--workers', stdout.getvalue())
