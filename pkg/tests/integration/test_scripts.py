"""
Fallcat - Test Runner Script Tests
"""
import shutil
import subprocess
from pathlib import Path

import pytest

SCRIPT = Path(__file__).resolve().parents[2] / 'scripts' / 'run-tests.sh'

pytestmark = [
    pytest.mark.integration,
    pytest.mark.skipif(shutil.which('bash') is None, reason='needs bash'),
]


def pytest_args(*options):
    """Arguments the runner would hand to pytest."""
    out = subprocess.run(['bash', str(SCRIPT), '--dry-run', *options],
                         capture_output=True, text=True, check=True).stdout
    return out.splitlines()


class TestRunTests:
    """Argument assembly of scripts/run-tests.sh."""

    def test_fast_keeps_marker_expression_whole(self):
        args = pytest_args('--fast')
        assert args[args.index('-m') + 1] == 'not slow'

    def test_defaults(self):
        assert pytest_args() == ['python', '-m', 'pytest']

    def test_options_combine(self):
        args = pytest_args('--unit', '--parallel', '--no-cov', '-q')
        assert args[3:] == ['-q', '-n', 'auto', '--no-cov', '-m', 'unit']

    def test_extra_args_pass_through(self):
        args = pytest_args('--', '-k', 'disc and not slow')
        assert args[-2:] == ['-k', 'disc and not slow']
