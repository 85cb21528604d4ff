"""File client: JSON states, reports and manifests; CSV grids, densities and profiles.

Numbers in CSV files are written with 17 significant digits so a write/read cycle is
exact; JSON floats use Python's shortest round-trip repr.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
from pydantic import ValidationError

from phase_space_tomography.constants import FLOAT_FORMAT, STATE_VALIDATION_ENV
from phase_space_tomography.exceptions import SchemaError
from phase_space_tomography.models.distribution import (
    AXIS_NAMES,
    CoordinateKind,
    DistributionGrid,
)
from phase_space_tomography.models.manifest import Manifest
from phase_space_tomography.models.reconstruction import ReconstructionReport, VerifySummary
from phase_space_tomography.models.state import DensityMatrix, StateFile
from phase_space_tomography.services import report_service, state_service

logger = logging.getLogger(__name__)

CSV_FORMAT = f"%{FLOAT_FORMAT}"


def state_validation_mode() -> str:
    """'reject' (default) or 'warn', from TOMO_STATE_VALIDATION."""
    mode = os.getenv(STATE_VALIDATION_ENV, "reject").strip().lower()
    if mode not in ("reject", "warn"):
        logger.warning(f"Unknown {STATE_VALIDATION_ENV}={mode!r}, using 'reject'")
        return "reject"
    return mode


def _read_json(path: Path) -> Any:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON: {e}")


def _write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    logger.debug(f"Wrote {path}")
    return path


# =============================================================================
# States and reports
# =============================================================================


def read_state(path: Path) -> DensityMatrix:
    """Load a state JSON file and check its invariants (reject or warn per env)."""
    try:
        rho = StateFile.model_validate(_read_json(path)).to_matrix()
    except ValidationError as e:
        raise SchemaError(f"{path} does not match the state schema: {e}")
    state_service.require_valid(rho, warn_only=state_validation_mode() == "warn")
    return rho


def write_state(path: Path, rho: DensityMatrix) -> Path:
    return _write_json(path, StateFile.from_matrix(rho).model_dump())


def write_report(path: Path, report: ReconstructionReport) -> Path:
    return _write_json(path, report_service.report_document(report))


def read_report(path: Path) -> Dict[str, Any]:
    document = _read_json(path)
    if not isinstance(document, dict):
        raise SchemaError(f"{path} is not a report document")
    return document


def write_summary(path: Path, summary: VerifySummary) -> Path:
    return _write_json(path, summary.model_dump(mode="json"))


# =============================================================================
# Manifests
# =============================================================================


def read_manifest(path: Path) -> Manifest:
    try:
        return Manifest.model_validate(_read_json(path))
    except ValidationError as e:
        raise SchemaError(f"{path} does not match the manifest schema: {e}")


def write_manifest(path: Path, manifest: Manifest) -> Path:
    return _write_json(path, manifest.model_dump(mode="json"))


# =============================================================================
# CSV tables
# =============================================================================


def _read_table(path: Path, columns: Tuple[str, ...]) -> np.ndarray:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with open(path) as f:
        header = tuple(f.readline().strip().split(","))
    if header[: len(columns)] != columns:
        raise SchemaError(f"{path} has header {','.join(header)}, expected {','.join(columns)}")
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise SchemaError(f"{path} has malformed rows: {e}")
    if table.shape[1] != len(header):
        raise SchemaError(f"{path} rows have {table.shape[1]} columns, header has {len(header)}")
    return table


def _write_table(path: Path, columns: Tuple[str, ...], table: np.ndarray) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, delimiter=",", fmt=CSV_FORMAT, header=",".join(columns), comments="")
    logger.debug(f"Wrote {table.shape[0]} rows to {path}")
    return path


def write_density_csv(path: Path, x: np.ndarray, density: np.ndarray) -> Path:
    """Columns x,density."""
    return _write_table(path, ("x", "density"), np.column_stack([x, density]))


def read_density_csv(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    table = _read_table(path, ("x", "density"))
    return table[:, 0], table[:, 1]


def write_profile_csv(path: Path, r: np.ndarray, values: np.ndarray) -> Path:
    """Columns r,re,im."""
    values = np.asarray(values, dtype=np.complex128)
    return _write_table(path, ("r", "re", "im"), np.column_stack([r, values.real, values.imag]))


def read_profile_csv(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    table = _read_table(path, ("r", "re", "im"))
    return table[:, 0], table[:, 1] + 1j * table[:, 2]


def write_grid_csv(path: Path, grid: DistributionGrid) -> Path:
    """Long format: axis1,axis2,re,im[,valid], axis1-major."""
    first, second = np.meshgrid(grid.axis1, grid.axis2, indexing="ij")
    columns = grid.axis_names + ("re", "im")
    parts = [first.ravel(), second.ravel(), grid.values.real.ravel(), grid.values.imag.ravel()]
    if grid.valid is not None:
        columns = columns + ("valid",)
        parts.append(grid.valid.ravel().astype(np.float64))
    return _write_table(path, columns, np.column_stack(parts))


def read_grid_csv(path: Path, coords: CoordinateKind) -> DistributionGrid:
    table = _read_table(path, AXIS_NAMES[coords] + ("re", "im"))
    axis1 = np.unique(table[:, 0])
    axis2 = np.unique(table[:, 1])
    shape = (axis1.size, axis2.size)
    if table.shape[0] != axis1.size * axis2.size:
        raise SchemaError(f"{path} is not a full rectangular grid")
    first, second = table[:, 0].reshape(shape), table[:, 1].reshape(shape)
    if not (np.all(first == axis1[:, None]) and np.all(second == axis2[None, :])):
        raise SchemaError(f"{path} rows are not in axis1-major order")
    values = (table[:, 2] + 1j * table[:, 3]).reshape(shape)
    valid = table[:, 4].reshape(shape) > 0.5 if table.shape[1] > 4 else None
    return DistributionGrid(coords=coords, axis1=axis1, axis2=axis2, values=values, valid=valid)
