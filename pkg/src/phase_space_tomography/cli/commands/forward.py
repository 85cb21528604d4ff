"""forward command: tabulate distributions of a state into CSV files plus a manifest."""

from pathlib import Path
from typing import List, Optional

import click

from phase_space_tomography.cli.errors import json_errors
from phase_space_tomography.clients import files
from phase_space_tomography.models.distribution import (
    AxisSpec,
    CoordinateKind,
    DistributionSpec,
    DistributionTarget,
    GridSpec,
)
from phase_space_tomography.models.job import JobCommand, JobSpec
from phase_space_tomography.models.manifest import (
    FileRole,
    Manifest,
    ManifestFile,
    ManifestKind,
)
from phase_space_tomography.models.state import DensityMatrix, StateFile
from phase_space_tomography.services import forward_service, state_service

MANIFEST_NAME = "manifest.json"


def _axis(text: str) -> AxisSpec:
    start, stop, count = text.split(":")
    return AxisSpec(start=float(start), stop=float(stop), count=int(count))


def write_quadrature_bundle(
    rho: DensityMatrix, angles: int, x_axis: AxisSpec, out: Path
) -> Path:
    """One x,density CSV per angle 2πt/p and a manifest embedding the state."""
    spec = DistributionSpec(target=DistributionTarget.QUADRATURE, angles=angles)
    dataset = forward_service.sample_grid(rho, spec, x_grid=x_axis.points())
    entries: List[ManifestFile] = []
    for t, theta in enumerate(dataset.angles):  # type: ignore[union-attr]
        name = f"density_t{t}.csv"
        files.write_density_csv(out / name, dataset.x_grid, dataset.samples[t])  # type: ignore
        entries.append(ManifestFile(path=name, role=FileRole.DENSITY, angle=theta))
    manifest = Manifest(
        kind=ManifestKind.QUADRATURE,
        spec=spec,
        dim=rho.dim,
        state=StateFile.from_matrix(rho),
        files=entries,
        metadata={"x_grid": f"{x_axis.start}:{x_axis.stop}:{x_axis.count}"},
    )
    return files.write_manifest(out / MANIFEST_NAME, manifest)


def write_lambda_bundle(
    rho: DensityMatrix,
    lam: float,
    r_axis: AxisSpec,
    grid: Optional[GridSpec],
    grid_text: Optional[str],
    out: Path,
) -> Path:
    """Radial profiles r,re,im for k < D, an optional grid CSV, and the manifest."""
    spec = DistributionSpec(target=DistributionTarget.LAMBDA, lam=lam)
    r = r_axis.points()
    entries: List[ManifestFile] = []
    for k in range(rho.dim):
        name = f"profile_k{k}.csv"
        values = forward_service.lambda_fourier_component(rho, lam, k, r)
        files.write_profile_csv(out / name, r, values)
        entries.append(ManifestFile(path=name, role=FileRole.PROFILE, k=k))
    if grid is not None:
        tabulated = forward_service.sample_grid(rho, spec, grid=grid)
        files.write_grid_csv(out / "grid.csv", tabulated)  # type: ignore[arg-type]
        entries.append(ManifestFile(path="grid.csv", role=FileRole.GRID))
    manifest = Manifest(
        kind=ManifestKind.LAMBDA,
        spec=spec,
        dim=rho.dim,
        state=StateFile.from_matrix(rho),
        coords=grid.coords if grid is not None else None,
        grid=grid_text,
        files=entries,
        metadata={"r_grid": f"{r_axis.start}:{r_axis.stop}:{r_axis.count}"},
    )
    return files.write_manifest(out / MANIFEST_NAME, manifest)


@click.command()
@click.argument("state_file", type=click.Path(path_type=Path))
@click.option(
    "--target",
    type=click.Choice([t.value for t in DistributionTarget]),
    required=True,
    help="Quadrature densities or a lambda distribution",
)
@click.option("--angles", type=int, default=None, help="Angle count p (default: 2D - 1)")
@click.option("--lambda", "lam", type=float, default=None, help="Lambda of the distribution")
@click.option(
    "--efficiency", type=float, default=None, help="Detector efficiency, lambda = 1 - eta"
)
@click.option("--grid", type=str, default=None, help='Phase-space grid "x0:x1:n,y0:y1:n"')
@click.option("--polar", is_flag=True, help="Read --grid as (r, theta) instead of (q, p)")
@click.option("--x-grid", default="-10:10:2001", show_default=True, help="Quadrature x axis")
@click.option("--r-grid", default="0:8:1601", show_default=True, help="Radial profile axis")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
@json_errors
def forward(
    state_file: Path,
    target: str,
    angles: Optional[int],
    lam: Optional[float],
    efficiency: Optional[float],
    grid: Optional[str],
    polar: bool,
    x_grid: str,
    r_grid: str,
    out: Path,
):
    """Tabulate the quadrature or lambda distribution of STATE_FILE into --out."""
    if efficiency is not None:
        lam = state_service.lambda_from_efficiency(efficiency)
    JobSpec(
        command=JobCommand.FORWARD,
        inputs=[state_file],
        output=out,
        lam=lam,
        angles=angles,
        grid=grid,
    ).validate_windows()
    rho = files.read_state(state_file)
    if target == DistributionTarget.QUADRATURE.value:
        p = angles if angles is not None else 2 * rho.dim - 1
        manifest_path = write_quadrature_bundle(rho, p, _axis(x_grid), out)
    else:
        if lam is None:
            raise click.UsageError("--target lambda needs --lambda or --efficiency")
        coords = CoordinateKind.POLAR if polar else CoordinateKind.CARTESIAN
        spec = GridSpec.parse(grid, coords) if grid is not None else None
        manifest_path = write_lambda_bundle(rho, lam, _axis(r_grid), spec, grid, out)
    click.echo(f"✓ Manifest: {manifest_path}")
