"""Tests for reconstruct command."""

import json

import numpy as np
import pytest

from phase_space_tomography.clients import files
from phase_space_tomography.services import report_service, state_service


@pytest.fixture
def rho():
    return state_service.random_state(3, seed=17)


@pytest.fixture
def state_file(tmp_path, rho):
    return files.write_state(tmp_path / "state.json", rho)


@pytest.fixture
def forward_manifest(invoke, tmp_path, state_file):
    """Run forward into a fresh directory and return the manifest path."""

    def make(name, *args):
        out = tmp_path / name
        result = invoke("forward", state_file, *args, "--out", out)
        assert result.exit_code == 0, result.output
        return out / "manifest.json"

    return make


def _matrix(path):
    return report_service.matrix_from_document(files.read_report(path)).elements


class TestQuadratureMethods:
    """quad-full and quad-finite."""

    def test_quad_full_exact(self, invoke, tmp_path, forward_manifest, rho):
        manifest = forward_manifest("quad", "--target", "quadrature")
        out = tmp_path / "report.json"
        result = invoke("reconstruct", manifest, "--method", "quad-full", "--out", out)

        assert result.exit_code == 0, result.output
        assert "✓ quad-full: 3x3 matrix, 0 flagged element(s)" in result.output
        document = json.loads(out.read_text())
        assert document["method"] == "quad-full"
        np.testing.assert_allclose(_matrix(out), rho.elements, atol=1e-8)

    def test_quad_full_from_samples(self, invoke, tmp_path, forward_manifest, rho):
        manifest = forward_manifest("quad", "--target", "quadrature")
        out = tmp_path / "report.json"
        result = invoke(
            "reconstruct", manifest, "--method", "quad-full", "--sampled", "--out", out
        )

        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["tolerance"] == pytest.approx(1e-4)
        np.testing.assert_allclose(_matrix(out), rho.elements, atol=1e-4)

    def test_quad_full_needs_enough_sampled_angles(
        self, invoke, tmp_path, forward_manifest, error_payload
    ):
        manifest = forward_manifest("quad", "--target", "quadrature", "--angles", 3)
        result = invoke(
            "reconstruct",
            manifest,
            "--method",
            "quad-full",
            "--sampled",
            "--out",
            tmp_path / "r.json",
        )

        assert result.exit_code == 1
        error = error_payload(result.output)
        assert error["code"] == "validity_window"
        assert "at least 5" in error["message"]

    def test_quad_finite(self, invoke, tmp_path, forward_manifest, rho):
        manifest = forward_manifest("quad", "--target", "quadrature", "--angles", 5)
        out = tmp_path / "report.json"
        result = invoke("reconstruct", manifest, "--method", "quad-finite", "--out", out)

        assert result.exit_code == 0, result.output
        matrix = _matrix(out)
        assert matrix.shape == (5, 5)
        np.testing.assert_allclose(matrix[:3, :3], rho.elements, atol=1e-8)

    def test_kind_mismatch(self, invoke, tmp_path, forward_manifest, error_payload):
        manifest = forward_manifest("lam", "--target", "lambda", "--lambda", -0.5)
        result = invoke("reconstruct", manifest, "--method", "quad-full", "--out", tmp_path / "r")

        assert result.exit_code == 1
        assert error_payload(result.output)["code"] == "schema"


class TestLambdaMethods:
    """lambda-int, lambda-diff and q-function."""

    def test_lambda_int_reads_lambda_from_manifest(self, invoke, tmp_path, forward_manifest, rho):
        manifest = forward_manifest("lam", "--target", "lambda", "--lambda", -0.5)
        out = tmp_path / "report.json"
        result = invoke("reconstruct", manifest, "--method", "lambda-int", "--out", out)

        assert result.exit_code == 0, result.output
        np.testing.assert_allclose(_matrix(out), rho.elements, atol=1e-8)

    def test_lambda_int_positive_lambda_diverges(
        self, invoke, tmp_path, forward_manifest, error_payload
    ):
        manifest = forward_manifest("lam", "--target", "lambda", "--lambda", 0.3)
        result = invoke("reconstruct", manifest, "--method", "lambda-int", "--out", tmp_path / "r")

        assert result.exit_code == 1
        error = error_payload(result.output)
        assert error["type"] == "ValidityWindowError"
        assert "diverges" in error["message"]

    def test_lambda_mismatch(self, invoke, tmp_path, forward_manifest, error_payload):
        manifest = forward_manifest("lam", "--target", "lambda", "--lambda", -0.5)
        result = invoke(
            "reconstruct",
            manifest,
            "--method",
            "lambda-int",
            "--lambda",
            -0.4,
            "--out",
            tmp_path / "r.json",
        )

        assert result.exit_code == 1
        assert "does not match" in error_payload(result.output)["message"]

    def test_lambda_diff_override(self, invoke, tmp_path, forward_manifest, rho, error_payload):
        manifest = forward_manifest("lam", "--target", "lambda", "--lambda", -0.6)
        out = tmp_path / "report.json"
        refused = invoke("reconstruct", manifest, "--method", "lambda-diff", "--out", out)
        assert refused.exit_code == 1
        assert "1/2" in error_payload(refused.output)["message"]

        result = invoke(
            "reconstruct",
            manifest,
            "--method",
            "lambda-diff",
            "--allow-lambda-override",
            "--out",
            out,
        )
        assert result.exit_code == 0, result.output
        np.testing.assert_allclose(_matrix(out), rho.elements, atol=1e-10)

    def test_q_function(self, invoke, tmp_path, forward_manifest, rho):
        manifest = forward_manifest("q", "--target", "lambda", "--lambda", 0.0)
        out = tmp_path / "report.json"
        result = invoke("reconstruct", manifest, "--method", "q-function", "--out", out)

        assert result.exit_code == 0, result.output
        np.testing.assert_allclose(_matrix(out), rho.elements, atol=1e-12)
