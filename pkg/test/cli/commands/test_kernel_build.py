"""Tests for kernel-build command."""

import math

import numpy as np
import pytest

from phase_space_tomography.clients import files
from phase_space_tomography.models.distribution import CoordinateKind
from phase_space_tomography.services import forward_service, state_service


@pytest.fixture
def quadrature_manifest(invoke, tmp_path):
    state = files.write_state(tmp_path / "state.json", state_service.coherent_state(14, 0.3))
    result = invoke("forward", state, "--target", "quadrature", "--out", tmp_path / "quad")
    assert result.exit_code == 0, result.output
    return tmp_path / "quad" / "manifest.json"


@pytest.mark.slow
def test_kernel_build_matches_closed_form(invoke, tmp_path, quadrature_manifest):
    out = tmp_path / "built"
    result = invoke(
        "kernel-build",
        quadrature_manifest,
        "--lambda",
        -0.5,
        "--grid",
        "-1:1:3,-1:1:3",
        "--out",
        out,
    )

    assert result.exit_code == 0, result.output
    manifest = files.read_manifest(out / "manifest.json")
    assert manifest.kind.value == "lambda"
    assert manifest.grid == "-1:1:3,-1:1:3"
    grid = files.read_grid_csv(out / "grid.csv", CoordinateKind.CARTESIAN)
    q, p = np.meshgrid(grid.axis1, grid.axis2, indexing="ij")
    expected = forward_service.coherent_lambda_oracle(0.3, -0.5, (q + 1j * p) / math.sqrt(2))
    np.testing.assert_allclose(grid.values, expected, atol=1e-5)


def test_kernel_build_needs_lambda(invoke, tmp_path, quadrature_manifest):
    result = invoke(
        "kernel-build", quadrature_manifest, "--grid", "-1:1:3,-1:1:3", "--out", tmp_path / "b"
    )

    assert result.exit_code == 2
    assert "--lambda or --efficiency" in result.output


def test_kernel_build_rejects_unit_lambda(invoke, tmp_path, quadrature_manifest, error_payload):
    result = invoke(
        "kernel-build",
        quadrature_manifest,
        "--lambda",
        -1.0,
        "--grid",
        "-1:1:3,-1:1:3",
        "--out",
        tmp_path / "b",
    )

    assert result.exit_code == 1
    assert "|lambda| < 1" in error_payload(result.output)["message"]
