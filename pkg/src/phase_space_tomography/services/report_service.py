"""Report documents and verification against a reference state."""

import logging
from typing import Any, Dict

import numpy as np

from phase_space_tomography.exceptions import SchemaError
from phase_space_tomography.models.reconstruction import (
    ElementComparison,
    ReconstructionReport,
    VerifySummary,
)
from phase_space_tomography.models.state import DensityMatrix, StateFile

logger = logging.getLogger(__name__)


def report_document(report: ReconstructionReport) -> Dict[str, Any]:
    """JSON-ready dict of a report; the matrix uses the state-file schema."""
    return {
        "method": report.method.value,
        "dim": report.matrix.dim,
        "tolerance": report.tolerance,
        "matrix": StateFile.from_matrix(report.matrix).model_dump(),
        "elements": [e.model_dump() for e in report.elements],
        "flagged": len(report.flagged),
        "assumptions": list(report.assumptions),
        "validation": report.validation.model_dump(),
        "diagnostics": report.diagnostics,
    }


def matrix_from_document(document: Dict[str, Any]) -> DensityMatrix:
    """Reconstructed matrix of a report document."""
    if "matrix" not in document:
        raise SchemaError("report document has no 'matrix' entry")
    try:
        return StateFile.model_validate(document["matrix"]).to_matrix()
    except ValueError as e:
        raise SchemaError(f"report matrix does not match the state schema: {e}")


def compare_states(
    reconstructed: DensityMatrix, reference: DensityMatrix, tol: float
) -> VerifySummary:
    """Element-wise comparison; dimensions must agree."""
    if reconstructed.dim != reference.dim:
        raise SchemaError(
            f"dimension mismatch: reconstruction is {reconstructed.dim}x{reconstructed.dim}, "
            f"reference is {reference.dim}x{reference.dim}"
        )
    ours, theirs = reconstructed.elements, reference.elements
    errors = np.abs(ours - theirs)
    rows = [
        ElementComparison(
            m=m,
            n=n,
            reconstructed=(float(ours[m, n].real), float(ours[m, n].imag)),
            reference=(float(theirs[m, n].real), float(theirs[m, n].imag)),
            abs_error=float(errors[m, n]),
        )
        for m in range(reference.dim)
        for n in range(reference.dim)
    ]
    worst = float(np.max(errors))
    summary = VerifySummary(
        dim=reference.dim,
        max_abs_error=worst,
        tolerance=tol,
        passed=worst <= tol,
        elements=rows,
    )
    logger.info(f"Verified {reference.dim}x{reference.dim} reconstruction: max error {worst:.3g}")
    return summary
