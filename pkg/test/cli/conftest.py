"""Shared fixtures for CLI tests."""

import json

import pytest
from click.testing import CliRunner

from phase_space_tomography.cli.main import cli
from phase_space_tomography.providers.manager import provider_manager


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Log into the test directory and start every test with an empty provider cache."""
    monkeypatch.setenv("TOMO_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("TOMO_STATE_VALIDATION", raising=False)
    provider_manager.clear()
    yield
    provider_manager.clear()


@pytest.fixture
def invoke():
    runner = CliRunner()

    def run(*args):
        return runner.invoke(cli, [str(a) for a in args])

    return run


@pytest.fixture
def error_payload():
    """Parse the JSON error object printed by a failing command."""

    def parse(output: str) -> dict:
        line = next(l for l in output.splitlines() if l.startswith('{"error"'))
        return json.loads(line)["error"]

    return parse
