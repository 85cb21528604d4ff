"""Batch job specification shared by the CLI commands."""

from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from phase_space_tomography.constants import ELEMENT_TOL, MAX_DIM
from phase_space_tomography.exceptions import GridError, ValidityWindowError
from phase_space_tomography.models.distribution import GridSpec
from phase_space_tomography.models.reconstruction import ReconstructionMethod
from phase_space_tomography.models.state import LambdaParam


class JobCommand(str, Enum):
    """CLI subcommands."""

    GEN_STATE = "gen-state"
    FORWARD = "forward"
    RECONSTRUCT = "reconstruct"
    SHIFT_LAMBDA = "shift-lambda"
    KERNEL_BUILD = "kernel-build"
    VERIFY = "verify"


class ShiftDirection(str, Enum):
    """Convolution towards larger λ, or its Fourier inverse towards smaller λ."""

    FORWARD = "forward"
    INVERSE = "inverse"


class JobSpec(BaseModel):
    """Inputs, output and parameters of one tomo invocation."""

    model_config = ConfigDict(use_enum_values=False)

    command: JobCommand
    inputs: List[Path] = Field(default_factory=list)
    output: Optional[Path] = None
    dim: Optional[int] = Field(None, ge=1, le=MAX_DIM)
    lam: Optional[float] = None
    lam_prime: Optional[float] = None
    angles: Optional[int] = Field(None, ge=1)
    grid: Optional[str] = None
    tol: float = Field(ELEMENT_TOL, gt=0.0)
    allow_override: bool = False
    method: Optional[ReconstructionMethod] = None
    direction: Optional[ShiftDirection] = None

    def validate_windows(self) -> None:
        """Check parameter windows before dispatch, raising the module errors verbatim."""
        for path in self.inputs:
            if not path.exists():
                raise FileNotFoundError(f"Input file not found: {path}")
        if self.grid is not None:
            try:
                GridSpec.parse(self.grid)
            except ValueError as e:
                raise GridError(str(e))
        if self.lam is None:
            if self.method in (ReconstructionMethod.LAMBDA_INT, ReconstructionMethod.LAMBDA_DIFF):
                raise ValidityWindowError(f"{self.method.value} needs a lambda value")
            return
        try:
            param = LambdaParam(real=self.lam)
        except ValueError as e:
            raise ValidityWindowError(str(e))
        if self.method == ReconstructionMethod.LAMBDA_INT:
            param.require_integration_window()
        elif self.method == ReconstructionMethod.LAMBDA_DIFF:
            param.require_differentiation_window(self.allow_override)
        elif self.method == ReconstructionMethod.Q_FUNCTION and self.lam != 0.0:
            raise ValidityWindowError(
                f"q-function reconstruction reads the lambda = 0 distribution, got {self.lam}"
            )
        if self.command == JobCommand.KERNEL_BUILD and abs(self.lam) >= 1.0:
            raise ValidityWindowError(
                f"Markov kernel requires |lambda| < 1 for its series to converge, got {self.lam}"
            )
        if self.command == JobCommand.SHIFT_LAMBDA:
            if self.lam_prime is None:
                raise ValidityWindowError("lambda shift requires --lambda-prime")
            if self.direction == ShiftDirection.INVERSE:
                LambdaParam(real=self.lam_prime).require_shift_pair(self.lam)
            else:
                param.require_shift_pair(self.lam_prime)
