"""Manifest linking the files of one multi-file output."""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from phase_space_tomography.models.distribution import CoordinateKind, DistributionSpec
from phase_space_tomography.models.state import StateFile


class ManifestKind(str, Enum):
    """What a manifest describes."""

    QUADRATURE = "quadrature"
    LAMBDA = "lambda"


class FileRole(str, Enum):
    DENSITY = "density"
    GRID = "grid"
    PROFILE = "profile"


class ManifestFile(BaseModel):
    """One CSV of the output, relative to the manifest's directory."""

    path: str
    role: FileRole
    angle: Optional[float] = Field(None, description="Quadrature angle of a density file")
    k: Optional[int] = Field(None, ge=0, description="Angular index of a profile file")


class ShiftRecord(BaseModel):
    """Parameters of a λ-shift applied to a grid."""

    lam_from: float
    lam_to: float
    direction: str
    cutoff: Optional[float] = None
    zeroed_frequencies: int = 0
    margin: Optional[float] = None


class Manifest(BaseModel):
    """Index of the CSV files written by forward, shift-lambda and kernel-build."""

    kind: ManifestKind
    spec: DistributionSpec
    dim: Optional[int] = Field(None, ge=1, description="Dimension of the source state")
    state: Optional[StateFile] = Field(None, description="Embedded source state, when known")
    coords: Optional[CoordinateKind] = None
    grid: Optional[str] = Field(None, description="Grid spec x0:x1:n,y0:y1:n")
    files: List[ManifestFile] = Field(default_factory=list)
    shift: Optional[ShiftRecord] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)

    def files_with_role(self, role: FileRole) -> List[ManifestFile]:
        return [f for f in self.files if f.role == role]
