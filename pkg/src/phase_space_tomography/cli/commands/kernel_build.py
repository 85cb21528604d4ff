"""kernel-build command: λ-distribution on a grid straight from quadrature densities."""

from pathlib import Path
from typing import Optional

import click

from phase_space_tomography.cli.commands.shift_lambda import write_grid_bundle
from phase_space_tomography.cli.errors import json_errors
from phase_space_tomography.clients import files
from phase_space_tomography.exceptions import SchemaError
from phase_space_tomography.models.distribution import CoordinateKind, GridSpec
from phase_space_tomography.models.job import JobCommand, JobSpec
from phase_space_tomography.models.manifest import ManifestKind
from phase_space_tomography.providers.manager import provider_manager
from phase_space_tomography.services import kernel_service, state_service


@click.command(name="kernel-build")
@click.argument("manifest_path", metavar="MANIFEST", type=click.Path(path_type=Path))
@click.option("--lambda", "lam", type=float, default=None, help="Lambda of the output")
@click.option(
    "--efficiency", type=float, default=None, help="Detector efficiency, lambda = 1 - eta"
)
@click.option("--grid", type=str, required=True, help='Phase-space grid "x0:x1:n,y0:y1:n"')
@click.option("--polar", is_flag=True, help="Read --grid as (r, theta) instead of (q, p)")
@click.option("--sampled", is_flag=True, help="Use the CSV samples even if the state is embedded")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
@json_errors
def kernel_build(
    manifest_path: Path,
    lam: Optional[float],
    efficiency: Optional[float],
    grid: str,
    polar: bool,
    sampled: bool,
    out: Path,
):
    """Build W^lambda on --grid from the quadrature densities of MANIFEST."""
    if efficiency is not None:
        lam = state_service.lambda_from_efficiency(efficiency)
    if lam is None:
        raise click.UsageError("kernel-build needs --lambda or --efficiency")
    JobSpec(
        command=JobCommand.KERNEL_BUILD, inputs=[manifest_path], output=out, lam=lam, grid=grid
    ).validate_windows()
    manifest = files.read_manifest(manifest_path)
    if manifest.kind != ManifestKind.QUADRATURE:
        raise SchemaError(f"{manifest_path} is not a quadrature manifest")

    coords = CoordinateKind.POLAR if polar else CoordinateKind.CARTESIAN
    spec = GridSpec.parse(grid, coords)
    density = provider_manager.density_function(manifest_path, sampled)
    built = kernel_service.lambda_from_quadratures(
        density, lam, spec, label=str(manifest_path)
    )
    manifest = manifest.model_copy(update={"grid": grid})
    written = write_grid_bundle(built, lam, manifest, out, str(manifest_path))
    click.echo(f"✓ Built W^{lam} on a {built.values.shape} grid: {written}")
