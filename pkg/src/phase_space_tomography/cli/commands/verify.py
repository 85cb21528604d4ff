"""verify command: compare a reconstruction report with a reference state."""

import json
import sys
from pathlib import Path
from typing import Optional

import click

from phase_space_tomography.cli.errors import json_errors
from phase_space_tomography.clients import files
from phase_space_tomography.constants import ELEMENT_TOL
from phase_space_tomography.models.job import JobCommand, JobSpec
from phase_space_tomography.services import report_service


@click.command()
@click.argument("report_path", metavar="REPORT", type=click.Path(path_type=Path))
@click.argument("reference_path", metavar="REFERENCE", type=click.Path(path_type=Path))
@click.option("--tol", type=float, default=ELEMENT_TOL, show_default=True, help="Max abs error")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@json_errors
def verify(report_path: Path, reference_path: Path, tol: float, out: Optional[Path]):
    """Compare the matrix of REPORT with the state in REFERENCE; exit 1 on mismatch."""
    JobSpec(
        command=JobCommand.VERIFY, inputs=[report_path, reference_path], output=out, tol=tol
    ).validate_windows()
    matrix = report_service.matrix_from_document(files.read_report(report_path))
    reference = files.read_state(reference_path)
    summary = report_service.compare_states(matrix, reference, tol)
    if out is not None:
        files.write_summary(out, summary)
    click.echo(
        json.dumps(
            summary.model_dump(mode="json", exclude={"elements"}), indent=2, sort_keys=True
        )
    )
    if not summary.passed:
        sys.exit(1)
