"""shift-lambda command: move a tabulated λ-distribution to another λ."""

from pathlib import Path

import click

from phase_space_tomography.cli.errors import json_errors
from phase_space_tomography.clients import files
from phase_space_tomography.exceptions import SchemaError
from phase_space_tomography.models.distribution import (
    CoordinateKind,
    DistributionGrid,
    DistributionSpec,
    DistributionTarget,
)
from phase_space_tomography.models.job import JobCommand, JobSpec, ShiftDirection
from phase_space_tomography.models.manifest import (
    FileRole,
    Manifest,
    ManifestFile,
    ManifestKind,
    ShiftRecord,
)
from phase_space_tomography.services import shift_service

GRID_NAME = "grid.csv"


def write_grid_bundle(
    grid: DistributionGrid, lam: float, source: Manifest, out: Path, label: str
) -> Path:
    """Grid-only lambda manifest; shifted and kernel-built outputs carry no state."""
    files.write_grid_csv(out / GRID_NAME, grid)
    shift = grid.metadata.get("shift")
    manifest = Manifest(
        kind=ManifestKind.LAMBDA,
        spec=DistributionSpec(target=DistributionTarget.LAMBDA, lam=lam),
        dim=source.dim,
        coords=grid.coords,
        grid=source.grid,
        files=[ManifestFile(path=GRID_NAME, role=FileRole.GRID)],
        shift=ShiftRecord.model_validate(shift) if shift is not None else None,
        metadata={"source": label},
    )
    return files.write_manifest(out / "manifest.json", manifest)


@click.command(name="shift-lambda")
@click.argument("manifest_path", metavar="MANIFEST", type=click.Path(path_type=Path))
@click.option("--lambda-prime", "lam_prime", type=float, required=True, help="Target lambda")
@click.option(
    "--direction",
    type=click.Choice([d.value for d in ShiftDirection]),
    default=ShiftDirection.FORWARD.value,
    show_default=True,
    help="forward convolves towards a larger lambda, inverse deconvolves to a smaller one",
)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
@json_errors
def shift_lambda(manifest_path: Path, lam_prime: float, direction: str, out: Path):
    """Shift the gridded lambda distribution of MANIFEST to --lambda-prime."""
    JobSpec(command=JobCommand.SHIFT_LAMBDA, inputs=[manifest_path]).validate_windows()
    manifest = files.read_manifest(manifest_path)
    if manifest.kind != ManifestKind.LAMBDA or manifest.spec.lam is None:
        raise SchemaError(f"{manifest_path} is not a lambda manifest")
    grids = manifest.files_with_role(FileRole.GRID)
    if not grids:
        raise SchemaError(f"{manifest_path} lists no grid file; run forward with --grid")
    lam = float(manifest.spec.lam)
    chosen = ShiftDirection(direction)
    JobSpec(
        command=JobCommand.SHIFT_LAMBDA,
        output=out,
        lam=lam,
        lam_prime=lam_prime,
        direction=chosen,
    ).validate_windows()

    coords = manifest.coords or CoordinateKind.CARTESIAN
    grid = files.read_grid_csv(manifest_path.parent / grids[0].path, coords)
    if chosen == ShiftDirection.FORWARD:
        shifted = shift_service.shift_lambda_forward(grid, lam, lam_prime)
    else:
        shifted = shift_service.shift_lambda_inverse(grid, lam, lam_prime)
    written = write_grid_bundle(shifted, lam_prime, manifest, out, str(manifest_path))
    click.echo(f"✓ Shifted lambda {lam} -> {lam_prime} ({chosen.value}): {written}")
