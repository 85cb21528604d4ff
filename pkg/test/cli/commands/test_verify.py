"""Tests for verify command."""

import json

import pytest

from phase_space_tomography.clients import files
from phase_space_tomography.services import state_service


@pytest.fixture
def report(invoke, tmp_path):
    """quad-full report of the Fock state |2> at dim 4."""
    state = files.write_state(tmp_path / "fock.json", state_service.fock_state(4, 2))
    invoke("forward", state, "--target", "quadrature", "--out", tmp_path / "quad")
    out = tmp_path / "report.json"
    result = invoke(
        "reconstruct", tmp_path / "quad" / "manifest.json", "--method", "quad-full", "--out", out
    )
    assert result.exit_code == 0, result.output
    return out


def _summary(output):
    return json.loads(output[output.index("{") :])


def test_verify_passes(invoke, tmp_path, report):
    reference = files.write_state(tmp_path / "ref.json", state_service.fock_state(4, 2))
    result = invoke("verify", report, reference)

    assert result.exit_code == 0, result.output
    summary = _summary(result.output)
    assert summary["passed"] is True
    assert summary["dim"] == 4
    assert summary["max_abs_error"] < 1e-8
    assert "elements" not in summary


def test_verify_mismatch_exits_1(invoke, tmp_path, report):
    reference = files.write_state(tmp_path / "ref.json", state_service.fock_state(4, 1))
    result = invoke("verify", report, reference)

    assert result.exit_code == 1
    summary = _summary(result.output)
    assert summary["passed"] is False
    assert summary["max_abs_error"] == pytest.approx(1.0, abs=1e-8)


def test_verify_dimension_mismatch(invoke, tmp_path, report, error_payload):
    reference = files.write_state(tmp_path / "ref.json", state_service.fock_state(5, 2))
    result = invoke("verify", report, reference)

    assert result.exit_code == 1
    error = error_payload(result.output)
    assert error["code"] == "schema"
    assert "dimension mismatch" in error["message"]


def test_verify_writes_summary(invoke, tmp_path, report):
    reference = files.write_state(tmp_path / "ref.json", state_service.fock_state(4, 2))
    out = tmp_path / "summary.json"
    result = invoke("verify", report, reference, "--tol", 1e-6, "--out", out)

    assert result.exit_code == 0, result.output
    written = json.loads(out.read_text())
    assert written["tolerance"] == 1e-6
    assert len(written["elements"]) == 16
    assert {"m", "n", "abs_error"} <= set(written["elements"][0])


def test_verify_missing_report(invoke, tmp_path, error_payload):
    reference = files.write_state(tmp_path / "ref.json", state_service.fock_state(4, 2))
    result = invoke("verify", tmp_path / "missing.json", reference)

    assert result.exit_code == 1
    assert error_payload(result.output)["code"] == "file_not_found"
