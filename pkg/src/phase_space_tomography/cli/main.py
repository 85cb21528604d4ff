"""Main CLI entry point for the phase-space tomography toolkit."""

import click

from phase_space_tomography.cli.commands.forward import forward
from phase_space_tomography.cli.commands.gen_state import gen_state
from phase_space_tomography.cli.commands.kernel_build import kernel_build
from phase_space_tomography.cli.commands.reconstruct import reconstruct
from phase_space_tomography.cli.commands.shift_lambda import shift_lambda
from phase_space_tomography.cli.commands.verify import verify
from phase_space_tomography.utils.logging import setup_logging


@click.group()
def cli():
    """Phase-space tomography: forward distributions and density-matrix reconstruction."""
    setup_logging()


# Register commands
cli.add_command(gen_state)
cli.add_command(forward)
cli.add_command(reconstruct)
cli.add_command(shift_lambda)
cli.add_command(kernel_build)
cli.add_command(verify)


if __name__ == "__main__":
    cli()
