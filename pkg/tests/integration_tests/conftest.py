"""Fixtures for CLI and pipeline runs."""

import json

import pytest

from multibell.bell_config import bell_config
from multibell.cli import main


@pytest.fixture(autouse=True)
def reset_config():
    """Start each CLI invocation from default configuration, without log files."""
    bell_config.reset()
    bell_config.unit_testing = True
    yield
    bell_config.reset()


@pytest.fixture
def run_multibell(capsys):
    """Run the CLI in-process. Returns (exit_code, stdout, stderr)."""

    def run(*args):
        exit_code = main([str(arg) for arg in args])
        captured = capsys.readouterr()
        return exit_code, captured.out, captured.err

    return run


@pytest.fixture
def run_json(run_multibell):
    """Run the CLI with JSON output and parse the result."""

    def run(*args):
        exit_code, out, err = run_multibell("--format", "json", *args)
        assert exit_code == 0, err
        return json.loads(out)

    return run
