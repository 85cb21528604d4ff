"""State models: density matrices, the lambda parameter and validation diagnostics."""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from phase_space_tomography.exceptions import ValidityWindowError


class DensityMatrix(BaseModel):
    """Truncated D×D density matrix in the Fock basis; entry (m, n) is ⟨m|ρ|n⟩.

    Construction only checks shape and finiteness. The physical invariants
    (Hermitian, unit trace, PSD) are checked by ``state_service.validate`` because
    reconstruction outputs are stored here before validation.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    elements: np.ndarray = Field(..., description="D×D complex matrix, row m column n")
    tail_mass: float = Field(
        0.0, ge=0.0, description="Trace removed by truncation before renormalization"
    )
    label: str = Field("", description="Human-readable origin of the state")

    @field_validator("elements", mode="before")
    @classmethod
    def _square_complex(cls, value: object) -> np.ndarray:
        arr = np.array(value, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValueError(f"elements must be a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("elements must be finite")
        arr.setflags(write=False)
        return arr

    @property
    def dim(self) -> int:
        return int(self.elements.shape[0])

    def element(self, m: int, n: int) -> complex:
        """ρ_mn, zero outside the truncation."""
        if 0 <= m < self.dim and 0 <= n < self.dim:
            return complex(self.elements[m, n])
        return 0j

    def diagonal(self, k: int) -> np.ndarray:
        """The k-th lower diagonal ρ_{n+k,n}, n = 0..D-1-k (empty when k ≥ D)."""
        if k >= self.dim:
            return np.zeros(0, dtype=np.complex128)
        return np.array(np.diagonal(self.elements, offset=-k))

    def adjoint(self) -> "DensityMatrix":
        return DensityMatrix(
            elements=self.elements.conj().T, tail_mass=self.tail_mass, label=self.label
        )


class LambdaParam(BaseModel):
    """Cahill–Glauber parameter λ = (s+1)/(s-1) with |λ| ≤ 1, λ ≠ 1."""

    real: float = Field(..., description="Real part of lambda")
    imag: float = Field(0.0, description="Imaginary part of lambda")

    @model_validator(mode="after")
    def _unit_disk(self) -> "LambdaParam":
        lam = complex(self.real, self.imag)
        if abs(lam) > 1.0 + 1e-15:
            raise ValueError(f"|lambda| must be <= 1, got {abs(lam)}")
        if lam == 1.0:
            raise ValueError("lambda = 1 is excluded (s is infinite)")
        return self

    @classmethod
    def of(cls, value: complex) -> "LambdaParam":
        value = complex(value)
        return cls(real=value.real, imag=value.imag)

    @classmethod
    def from_efficiency(cls, eta: float) -> "LambdaParam":
        """Detector efficiency η ∈ (0, 1] gives s = 1 - 2/η, i.e. λ = 1 - η."""
        if not 0.0 < eta <= 1.0:
            raise ValueError(f"efficiency must be in (0, 1], got {eta}")
        return cls(real=1.0 - eta)

    @property
    def value(self) -> complex:
        return complex(self.real, self.imag)

    @property
    def is_real(self) -> bool:
        return self.imag == 0.0

    @property
    def s(self) -> complex:
        return (self.value + 1.0) / (self.value - 1.0)

    def require_integration_window(self) -> float:
        """Integration reconstruction needs real λ in (-1, 0)."""
        lam = self.real
        if not self.is_real:
            raise ValidityWindowError(
                f"integration method requires real lambda in (-1, 0), got {self.value}"
            )
        if lam == 0.0:
            raise ValidityWindowError(
                "integration method requires lambda in (-1, 0); lambda = 0 leaves the "
                "kernel K^(1/lambda) undefined"
            )
        rate = (1.0 - lam) * (1.0 - 1.0 / lam)
        if lam > 0.0:
            raise ValidityWindowError(
                f"integration method requires lambda in (-1, 0), got {lam}: for the vacuum "
                f"the integral 2(1-lambda)(1-1/lambda) * int exp(-(1-lambda)(1-1/lambda) r^2) r dr "
                f"diverges because (1-lambda)(1-1/lambda) = {rate:.6g} < 0"
            )
        if lam <= -1.0:
            raise ValidityWindowError(
                f"integration method requires lambda in (-1, 0), got {lam}: the open window "
                "excludes the Wigner point lambda = -1"
            )
        return lam

    def require_differentiation_window(self, allow_override: bool = False) -> float:
        """Differentiation reconstruction: |λ| < 1/2 unless explicitly overridden."""
        if not self.is_real:
            raise ValidityWindowError(
                f"differentiation method requires real lambda, got {self.value}"
            )
        lam = self.real
        if abs(lam) >= 0.5 and not allow_override:
            raise ValidityWindowError(
                f"differentiation method requires |lambda| < 1/2, got {lam}: only then is "
                "|lambda|/(1-|lambda|) < 1 and the remainder bound decays for every state; "
                "use the override with a decaying transformed sequence to go beyond"
            )
        return lam

    def require_shift_pair(self, lambda_prime: float) -> float:
        """λ-shift needs real λ < λ′, both in (-1, 1)."""
        lam = self.real
        if not self.is_real or not (-1.0 < lam < 1.0 and -1.0 < lambda_prime < 1.0):
            raise ValidityWindowError(
                f"lambda shift requires real lambda, lambda' in (-1, 1), got "
                f"lambda={self.value}, lambda'={lambda_prime}"
            )
        if not lambda_prime > lam:
            raise ValidityWindowError(
                f"lambda shift requires lambda < lambda', got lambda={lam}, lambda'={lambda_prime}"
            )
        return lam


class StateDiagnostics(BaseModel):
    """Outcome of checking the density-matrix invariants."""

    hermiticity_defect: float = Field(..., description="max |ρ_mn - conj(ρ_nm)|")
    trace_defect: float = Field(..., description="|tr ρ - 1|")
    min_eigenvalue: float = Field(..., description="Smallest eigenvalue of the Hermitian part")
    cauchy_schwarz_violation: float = Field(
        ..., description="max over m,n of |ρ_mn|² - ρ_mm ρ_nn (clipped at 0)"
    )
    passed: bool = Field(..., description="True when every invariant holds")
    failures: List[str] = Field(default_factory=list, description="Failed invariant messages")


class StateFile(BaseModel):
    """JSON state schema: {"dim": D, "re": [[...]], "im": [[...]]}, row-major D×D."""

    dim: int = Field(..., ge=1, description="Matrix dimension D")
    re: List[List[float]] = Field(..., description="Real parts, row m column n")
    im: List[List[float]] = Field(..., description="Imaginary parts, row m column n")
    label: str = Field("", description="Origin of the state")
    tail_mass: float = Field(0.0, ge=0.0, description="Trace removed by truncation")

    @model_validator(mode="after")
    def _square(self) -> "StateFile":
        for name, rows in (("re", self.re), ("im", self.im)):
            if len(rows) != self.dim or any(len(row) != self.dim for row in rows):
                raise ValueError(f"'{name}' must be a {self.dim}x{self.dim} array")
        return self

    @classmethod
    def from_matrix(cls, rho: DensityMatrix) -> "StateFile":
        return cls(
            dim=rho.dim,
            re=np.real(rho.elements).tolist(),
            im=np.imag(rho.elements).tolist(),
            label=rho.label,
            tail_mass=rho.tail_mass,
        )

    def to_matrix(self) -> DensityMatrix:
        elements = np.array(self.re, dtype=np.float64) + 1j * np.array(self.im, dtype=np.float64)
        return DensityMatrix(elements=elements, tail_mass=self.tail_mass, label=self.label)
