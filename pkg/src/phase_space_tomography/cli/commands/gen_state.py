"""gen-state command: write a canonical test state as JSON."""

from pathlib import Path
from typing import Optional, Tuple

import click

from phase_space_tomography.cli.errors import json_errors
from phase_space_tomography.clients import files
from phase_space_tomography.constants import MAX_DIM, TAIL_MASS_TOL
from phase_space_tomography.models.job import JobCommand, JobSpec
from phase_space_tomography.models.state import DensityMatrix
from phase_space_tomography.services import state_service

STATE_KINDS = ["fock", "coherent", "thermal", "random"]


def _build_state(
    kind: str,
    params: Tuple[float, ...],
    dim: int,
    lam: Optional[float],
    seed: int,
    tail_tolerance: float,
) -> DensityMatrix:
    """Dispatch on KIND; PARAMS are positional numbers whose meaning depends on it."""
    if kind == "fock":
        if len(params) != 1:
            raise ValueError("fock takes one parameter: the photon number n")
        return state_service.fock_state(dim, int(params[0]))
    if kind == "coherent":
        if len(params) not in (1, 2):
            raise ValueError("coherent takes the amplitude as RE [IM]")
        alpha = complex(params[0], params[1] if len(params) == 2 else 0.0)
        return state_service.coherent_state(dim, alpha, tail_tolerance)
    if kind == "thermal":
        value = lam if lam is not None else (params[0] if params else None)
        if value is None:
            raise ValueError("thermal needs lambda (positional, --lambda or --efficiency)")
        return state_service.thermal_klambda_state(dim, float(value), tail_tolerance)
    rank = int(params[0]) if params else None
    return state_service.random_state(dim, rank=rank, seed=seed)


@click.command(name="gen-state")
@click.argument("kind", type=click.Choice(STATE_KINDS))
@click.argument("params", nargs=-1, type=float)
@click.option("--dim", type=click.IntRange(1, MAX_DIM), default=8, help="Truncation dimension D")
@click.option("--lambda", "lam", type=float, default=None, help="Lambda of a thermal state")
@click.option(
    "--efficiency", type=float, default=None, help="Detector efficiency, lambda = 1 - eta"
)
@click.option("--seed", type=int, default=0, help="Seed of a random state")
@click.option(
    "--tail-tolerance",
    type=float,
    default=TAIL_MASS_TOL,
    help=f"Largest truncated population accepted (default: {TAIL_MASS_TOL:g})",
)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@json_errors
def gen_state(
    kind: str,
    params: Tuple[float, ...],
    dim: int,
    lam: Optional[float],
    efficiency: Optional[float],
    seed: int,
    tail_tolerance: float,
    out: Path,
):
    """
    Generate a state and write it as JSON.

    KIND and PARAMS:
    - fock N
    - coherent RE [IM]
    - thermal LAMBDA (or --lambda / --efficiency)
    - random [RANK] (with --seed)
    """
    if efficiency is not None:
        lam = state_service.lambda_from_efficiency(efficiency)
    JobSpec(command=JobCommand.GEN_STATE, output=out, dim=dim).validate_windows()
    rho = _build_state(kind, params, dim, lam, seed, tail_tolerance)
    files.write_state(out, rho)
    click.echo(f"✓ Wrote {rho.label} ({rho.dim}x{rho.dim}) to {out}")
