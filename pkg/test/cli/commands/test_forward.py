"""Tests for forward command."""

import json

import numpy as np
import pytest

from phase_space_tomography.clients import files
from phase_space_tomography.models.distribution import CoordinateKind
from phase_space_tomography.services import forward_service, state_service


@pytest.fixture
def state_file(tmp_path):
    return files.write_state(tmp_path / "state.json", state_service.random_state(2, seed=4))


def test_forward_quadrature_writes_one_density_per_angle(invoke, tmp_path, state_file):
    out = tmp_path / "quad"
    result = invoke(
        "forward", state_file, "--target", "quadrature", "--x-grid", "-8:8:401", "--out", out
    )

    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["kind"] == "quadrature"
    assert manifest["spec"]["angles"] == 3
    assert [f["path"] for f in manifest["files"]] == [f"density_t{t}.csv" for t in range(3)]
    x, density = files.read_density_csv(out / "density_t1.csv")
    rho = files.read_state(state_file)
    np.testing.assert_allclose(
        density, forward_service.quad_density(rho, x, manifest["files"][1]["angle"]), atol=1e-15
    )


def test_forward_lambda_with_grid(invoke, tmp_path, state_file):
    out = tmp_path / "lam"
    result = invoke(
        "forward",
        state_file,
        "--target",
        "lambda",
        "--lambda",
        -0.5,
        "--grid",
        "0:2:3,0:3:4",
        "--polar",
        "--out",
        out,
    )

    assert result.exit_code == 0, result.output
    manifest = files.read_manifest(out / "manifest.json")
    assert manifest.spec.lam == -0.5
    assert manifest.coords == CoordinateKind.POLAR
    assert {f.path for f in manifest.files} == {"profile_k0.csv", "profile_k1.csv", "grid.csv"}
    grid = files.read_grid_csv(out / "grid.csv", CoordinateKind.POLAR)
    rho = files.read_state(state_file)
    r, theta = np.meshgrid(grid.axis1, grid.axis2, indexing="ij")
    np.testing.assert_allclose(
        grid.values, forward_service.lambda_distribution(rho, -0.5, r, theta), atol=1e-15
    )


def test_forward_lambda_needs_lambda(invoke, tmp_path, state_file):
    result = invoke("forward", state_file, "--target", "lambda", "--out", tmp_path / "lam")

    assert result.exit_code == 2
    assert "--lambda" in result.output


def test_forward_bad_grid(invoke, tmp_path, state_file, error_payload):
    args = ["--target", "lambda", "--lambda", 0.1, "--grid", "0:1:3", "--out", tmp_path / "lam"]
    result = invoke("forward", state_file, *args)

    assert result.exit_code == 1
    assert error_payload(result.output)["code"] == "grid"


def test_forward_missing_state(invoke, tmp_path, error_payload):
    result = invoke(
        "forward", tmp_path / "nope.json", "--target", "quadrature", "--out", tmp_path / "q"
    )

    assert result.exit_code == 1
    assert error_payload(result.output)["code"] == "file_not_found"
