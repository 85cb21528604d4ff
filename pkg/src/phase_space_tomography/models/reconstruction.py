"""Reconstruction models: moment tables, Taylor tables and reports."""

import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from phase_space_tomography.exceptions import TruncationError
from phase_space_tomography.models.state import DensityMatrix, StateDiagnostics


class ReconstructionMethod(str, Enum):
    """Reconstruction pipelines."""

    QUAD_FULL = "quad-full"
    QUAD_FINITE = "quad-finite"
    LAMBDA_INT = "lambda-int"
    LAMBDA_DIFF = "lambda-diff"
    Q_FUNCTION = "q-function"


class MomentTable(BaseModel):
    """Dawson-derivative moments W_{ρ,k,l} = ∫ Y^(k+2l)(x) W_{ρ,k}(x) dx, values[k, l]."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: np.ndarray = Field(..., description="Complex (dim × dim); only k + l < dim is used")
    roundings: Optional[np.ndarray] = Field(
        None, description="Rounding bound of each moment, same layout as values"
    )
    node_count: int = Field(..., ge=1, description="Gauss–Hermite nodes")
    x_range: Tuple[float, float] = Field(..., description="Outermost quadrature nodes")

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def get(self, k: int, l: int) -> complex:
        if k + l >= self.dim:
            raise KeyError(f"moment ({k}, {l}) outside the table of order {self.dim}")
        return complex(self.values[k, l])


class TaylorSource(str, Enum):
    """Origin of a Taylor table."""

    ANALYTIC = "analytic"
    FITTED = "fitted"


class TaylorCoefficients(BaseModel):
    """Coefficients a_j of r^j in exp((1-λ)r²)·W^λ_{ρ,k}(r), j = 0..order.

    ``complete`` marks tables that contain every nonzero coefficient (finite states),
    so sums over the table terminate exactly.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    k: int = Field(..., ge=0)
    lam: float
    coefficients: np.ndarray
    source: TaylorSource
    complete: bool = False
    condition_number: Optional[float] = None

    @model_validator(mode="after")
    def _parity(self) -> "TaylorCoefficients":
        coeffs = np.array(self.coefficients, dtype=np.complex128)
        if coeffs.ndim != 1:
            raise ValueError("coefficients must be a 1-D array")
        j = np.arange(coeffs.size)
        forbidden = (j < self.k) | ((j - self.k) % 2 == 1)
        if np.any(coeffs[forbidden] != 0):
            raise ValueError(
                f"coefficients of r^j must vanish for j < k and odd j - k (k={self.k})"
            )
        self.coefficients = coeffs
        return self

    @property
    def order(self) -> int:
        return int(self.coefficients.size - 1)

    def coefficient(self, j: int) -> complex:
        """a_j; zero past a complete table, an error past an incomplete one."""
        if j <= self.order:
            return complex(self.coefficients[j])
        if self.complete:
            return 0j
        raise TruncationError(f"coefficient a_{j} beyond fitted order {self.order}")

    def derivative(self, l: int) -> complex:
        """W_{ρ,k,l}: the l-th derivative at r = 0, l!·a_l."""
        return math.factorial(l) * self.coefficient(l)

    @property
    def support_end(self) -> int:
        """Largest p with a_{2p+k} ≠ 0 (-1 when the table is zero)."""
        nonzero = np.flatnonzero(self.coefficients)
        if nonzero.size == 0:
            return -1
        return int((nonzero[-1] - self.k) // 2)


class ElementEstimate(BaseModel):
    """One reconstructed element ρ_{n+k,n} with its error estimate."""

    n: int = Field(..., ge=0)
    k: int = Field(..., ge=0)
    re: float
    im: float
    residual: Optional[float] = Field(None, description="Error estimate for the element")
    truncation: Optional[int] = Field(None, description="Series truncation order used")
    flagged: bool = False
    reason: Optional[str] = None

    @model_validator(mode="after")
    def _reason(self) -> "ElementEstimate":
        if self.flagged and not self.reason:
            raise ValueError("flagged elements need a reason")
        return self

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class ReconstructionReport(BaseModel):
    """Reconstructed matrix with per-element estimates and convergence diagnostics."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: ReconstructionMethod
    matrix: DensityMatrix
    elements: List[ElementEstimate] = Field(default_factory=list)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    assumptions: List[str] = Field(default_factory=list)
    validation: StateDiagnostics
    tolerance: float

    @property
    def flagged(self) -> List[ElementEstimate]:
        return [e for e in self.elements if e.flagged]


class DivergenceTrend(str, Enum):
    """Behaviour of truncated vacuum integrals as the cutoff grows."""

    CONVERGENT = "convergent"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


class DivergenceReport(BaseModel):
    """Vacuum ρ_00 integral truncated at increasing radii."""

    lam: float
    rate: float = Field(..., description="(1-λ)(1-1/λ), the Gaussian rate of the integrand")
    cutoffs: List[float]
    values: List[float]
    trend: DivergenceTrend


class FormalInverseCase(BaseModel):
    """One sequence pushed through the banded formal-inverse pair."""

    name: str
    x: List[float]
    y: List[float]
    recovered: List[float]
    partial_sums: List[float] = Field(default_factory=list, description="Partial sums for x_0")
    oscillation: float = Field(0.0, description="Spread of the trailing partial sums")
    converged: bool
    recovers_input: bool
    detail: str


class FormalInverseReport(BaseModel):
    """Outcome of the shift-matrix pathology demonstration."""

    window: int
    cases: List[FormalInverseCase]


class ElementComparison(BaseModel):
    """One row of a verification table."""

    m: int
    n: int
    reconstructed: Tuple[float, float]
    reference: Tuple[float, float]
    abs_error: float


class VerifySummary(BaseModel):
    """Comparison of a reconstruction against a reference state."""

    dim: int
    max_abs_error: float
    tolerance: float
    passed: bool
    elements: List[ElementComparison]
