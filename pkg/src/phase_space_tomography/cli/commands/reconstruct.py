"""reconstruct command: density matrix from a forward manifest."""

from pathlib import Path
from typing import Optional

import click

from phase_space_tomography.cli.errors import json_errors
from phase_space_tomography.clients import files
from phase_space_tomography.constants import ELEMENT_TOL, MAX_DIM
from phase_space_tomography.exceptions import SchemaError, ValidityWindowError
from phase_space_tomography.models.job import JobCommand, JobSpec
from phase_space_tomography.models.manifest import Manifest, ManifestKind
from phase_space_tomography.models.reconstruction import (
    ReconstructionMethod,
    ReconstructionReport,
)
from phase_space_tomography.providers.manager import provider_manager
from phase_space_tomography.services import lambda_service, quadrature_service, state_service


QUADRATURE_METHODS = (ReconstructionMethod.QUAD_FULL, ReconstructionMethod.QUAD_FINITE)


def _check_kind(manifest: Manifest, method: ReconstructionMethod, path: Path) -> None:
    expected = ManifestKind.QUADRATURE if method in QUADRATURE_METHODS else ManifestKind.LAMBDA
    if manifest.kind != expected:
        raise SchemaError(
            f"{method.value} reads a {expected.value} manifest, {path} is {manifest.kind.value}"
        )


def run_reconstruction(
    manifest_path: Path,
    method: ReconstructionMethod,
    dim: int,
    lam: Optional[float],
    tol: float,
    allow_override: bool,
    sampled: bool,
) -> ReconstructionReport:
    """Dispatch a manifest to the reconstruction pipeline of ``method``."""
    if method == ReconstructionMethod.QUAD_FINITE:
        return quadrature_service.reconstruct_finite(
            provider_manager.dataset(manifest_path, sampled), tol
        )
    provider = provider_manager.get_provider(manifest_path, sampled)
    if method == ReconstructionMethod.QUAD_FULL:
        if not provider.closed_form:
            p = provider_manager.dataset(manifest_path, sampled=True).p
            if p < 2 * dim - 1:
                raise ValidityWindowError(
                    f"{p} sampled angles resolve components k < {p}; "
                    f"a {dim}x{dim} reconstruction needs at least {2 * dim - 1}"
                )
        return quadrature_service.reconstruct_full(provider, dim, tol)
    if lam is None:
        raise ValidityWindowError(f"{method.value} needs a lambda value")
    if provider.lam is not None and abs(provider.lam - lam) > 1e-12:
        raise ValidityWindowError(
            f"--lambda {lam} does not match the manifest's lambda {provider.lam}"
        )
    if method == ReconstructionMethod.LAMBDA_INT:
        return lambda_service.reconstruct_integration_matrix(provider, lam, dim, tol)
    if method == ReconstructionMethod.LAMBDA_DIFF:
        return lambda_service.reconstruct_differentiation_matrix(
            provider, lam, dim, tol, allow_override=allow_override
        )
    return lambda_service.reconstruct_q_function(provider, dim, tol)


@click.command()
@click.argument("manifest_path", metavar="MANIFEST", type=click.Path(path_type=Path))
@click.option(
    "--method",
    type=click.Choice([m.value for m in ReconstructionMethod]),
    required=True,
    help="Reconstruction pipeline",
)
@click.option("--dim", type=click.IntRange(1, MAX_DIM), default=None, help="Output dimension D")
@click.option("--lambda", "lam", type=float, default=None, help="Lambda of the distribution")
@click.option(
    "--efficiency", type=float, default=None, help="Detector efficiency, lambda = 1 - eta"
)
@click.option(
    "--tol", type=float, default=ELEMENT_TOL, show_default=True, help="Element tolerance"
)
@click.option(
    "--allow-lambda-override",
    "allow_override",
    is_flag=True,
    help="Run differentiation for |lambda| >= 1/2 when the decay condition holds",
)
@click.option("--sampled", is_flag=True, help="Use the CSV samples even if the state is embedded")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@json_errors
def reconstruct(
    manifest_path: Path,
    method: str,
    dim: Optional[int],
    lam: Optional[float],
    efficiency: Optional[float],
    tol: float,
    allow_override: bool,
    sampled: bool,
    out: Path,
):
    """Reconstruct a density matrix from MANIFEST and write a JSON report."""
    chosen = ReconstructionMethod(method)
    if efficiency is not None:
        lam = state_service.lambda_from_efficiency(efficiency)
    JobSpec(command=JobCommand.RECONSTRUCT, inputs=[manifest_path]).validate_windows()
    manifest = files.read_manifest(manifest_path)
    _check_kind(manifest, chosen, manifest_path)
    if lam is None and manifest.kind == ManifestKind.LAMBDA:
        lam = manifest.spec.lam
    if dim is None:
        dim = manifest.dim or manifest.spec.angles or 1
    JobSpec(
        command=JobCommand.RECONSTRUCT,
        output=out,
        dim=dim,
        lam=lam,
        tol=tol,
        allow_override=allow_override,
        method=chosen,
    ).validate_windows()

    report = run_reconstruction(manifest_path, chosen, dim, lam, tol, allow_override, sampled)
    files.write_report(out, report)
    click.echo(
        f"✓ {chosen.value}: {report.matrix.dim}x{report.matrix.dim} matrix, "
        f"{len(report.flagged)} flagged element(s) -> {out}"
    )
