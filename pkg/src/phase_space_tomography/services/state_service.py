"""State service: canonical test states, truncation and invariant checks."""

import logging
import math
from typing import Optional

import numpy as np

from phase_space_tomography.constants import (
    CAUCHY_SCHWARZ_TOL,
    HERMITICITY_TOL,
    PSD_TOL,
    TAIL_MASS_TOL,
    TRACE_TOL,
)
from phase_space_tomography.exceptions import InvalidStateError, ValidityWindowError
from phase_space_tomography.models.state import DensityMatrix, LambdaParam, StateDiagnostics
from phase_space_tomography.numerics.special import log_factorial

logger = logging.getLogger(__name__)


def _renormalized(elements: np.ndarray, tail: float, label: str) -> DensityMatrix:
    trace = float(np.real(np.trace(elements)))
    return DensityMatrix(elements=elements / trace, tail_mass=max(tail, 0.0), label=label)


def fock_state(dim: int, n: int) -> DensityMatrix:
    """|n⟩⟨n| in a dim-dimensional truncation."""
    if dim < 1:
        raise InvalidStateError(f"dim must be >= 1, got {dim}")
    if not 0 <= n < dim:
        raise InvalidStateError(f"Fock index {n} outside 0..{dim - 1}")
    elements = np.zeros((dim, dim), dtype=np.complex128)
    elements[n, n] = 1.0
    return DensityMatrix(elements=elements, label=f"fock({dim}, {n})")


def coherent_tail_mass(dim: int, alpha: complex) -> float:
    """Σ_{n≥dim} exp(-|α|²)|α|^(2n)/n!, the population lost by truncating |α⟩."""
    mean = abs(alpha) ** 2
    if mean == 0.0:
        return 0.0
    logs = [n * math.log(mean) - log_factorial(n) for n in range(dim)]
    kept = math.exp(-mean) * math.fsum(math.exp(v) for v in logs)
    return max(1.0 - kept, 0.0)


def coherent_state(
    dim: int, alpha: complex, tail_tolerance: float = TAIL_MASS_TOL
) -> DensityMatrix:
    """|α⟩⟨α| truncated to dim and renormalized.

    Raises when the truncated tail exceeds ``tail_tolerance``; the message names the
    smallest adequate dim.
    """
    alpha = complex(alpha)
    tail = coherent_tail_mass(dim, alpha)
    if tail > tail_tolerance:
        needed = dim
        while coherent_tail_mass(needed, alpha) > tail_tolerance:
            needed += 1
        raise InvalidStateError(
            f"coherent state alpha={alpha} loses tail mass {tail:.3g} > {tail_tolerance:.3g} "
            f"at dim={dim}; use dim >= {needed}"
        )
    n = np.arange(dim)
    log_norm = np.array([0.5 * log_factorial(int(j)) for j in n])
    powers = np.array([alpha**int(j) for j in n], dtype=np.complex128)
    amplitudes = np.exp(-0.5 * abs(alpha) ** 2 - log_norm) * powers
    elements = np.outer(amplitudes, amplitudes.conj())
    return _renormalized(elements, tail, f"coherent({dim}, {alpha})")


def thermal_klambda_state(
    dim: int, lam: float, tail_tolerance: Optional[float] = TAIL_MASS_TOL
) -> DensityMatrix:
    """Diagonal state (1-λ)λ^n, the normalized operator K^λ.

    ``tail_tolerance=None`` skips the truncation check.
    """
    if not 0.0 <= lam < 1.0:
        raise ValidityWindowError(f"thermal state needs lambda in [0, 1), got {lam}")
    tail = lam**dim
    if tail_tolerance is not None and tail > tail_tolerance:
        needed = math.ceil(math.log(tail_tolerance) / math.log(lam))
        raise InvalidStateError(
            f"thermal state lambda={lam} loses tail mass {tail:.3g} at dim={dim}; "
            f"use dim >= {needed}"
        )
    populations = (1.0 - lam) * np.power(lam, np.arange(dim))
    return _renormalized(np.diag(populations).astype(np.complex128), tail, f"thermal({dim}, {lam})")


def random_state(dim: int, rank: Optional[int] = None, seed: int = 0) -> DensityMatrix:
    """Random valid density matrix G G†/tr(G G†) with complex Gaussian G of shape (dim, rank)."""
    if dim < 1:
        raise InvalidStateError(f"dim must be >= 1, got {dim}")
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise InvalidStateError(f"rank must be in 1..{dim}, got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    elements = g @ g.conj().T
    elements = 0.5 * (elements + elements.conj().T)
    return _renormalized(elements, 0.0, f"random({dim}, rank={rank}, seed={seed})")


def lambda_from_efficiency(eta: float) -> float:
    """λ for detector efficiency η (s = 1 - 2/η)."""
    return LambdaParam.from_efficiency(eta).real


def tail_mass(rho: DensityMatrix, p: int) -> float:
    """Σ_{n≥p} ρ_nn."""
    if not 0 <= p <= rho.dim:
        raise InvalidStateError(f"p must be in 0..{rho.dim}, got {p}")
    return float(np.sum(np.real(np.diagonal(rho.elements)[p:])))


def truncate_normalize(rho: DensityMatrix, p: int) -> DensityMatrix:
    """ρ_p = P_p ρ P_p / tr(P_p ρ P_p)."""
    if not 1 <= p <= rho.dim:
        raise InvalidStateError(f"p must be in 1..{rho.dim}, got {p}")
    block = np.array(rho.elements[:p, :p])
    trace = float(np.real(np.trace(block)))
    if trace == 0.0:
        raise InvalidStateError(
            f"leading {p}x{p} block has zero trace; choose p past the first populated level"
        )
    if p == rho.dim:
        return rho
    return DensityMatrix(
        elements=block / trace,
        tail_mass=rho.tail_mass + tail_mass(rho, p),
        label=f"{rho.label} truncated to {p}",
    )


def validate(rho: DensityMatrix) -> StateDiagnostics:
    """Check Hermiticity, unit trace, PSD and the Cauchy–Schwarz bound."""
    a = rho.elements
    hermiticity = float(np.max(np.abs(a - a.conj().T)))
    trace_defect = abs(complex(np.trace(a)) - 1.0)
    hermitian_part = 0.5 * (a + a.conj().T)
    min_eig = float(np.min(np.linalg.eigvalsh(hermitian_part)))
    diag = np.real(np.diagonal(a))
    cs = float(np.max(np.clip(np.abs(a) ** 2 - np.outer(diag, diag), 0.0, None)))

    failures = []
    if hermiticity > HERMITICITY_TOL:
        failures.append(f"not Hermitian: max |rho_mn - conj(rho_nm)| = {hermiticity:.3g}")
    if trace_defect > TRACE_TOL:
        failures.append(f"trace defect |tr rho - 1| = {trace_defect:.3g}")
    if min_eig < -PSD_TOL:
        failures.append(f"not positive semidefinite: min eigenvalue {min_eig:.3g}")
    if cs > CAUCHY_SCHWARZ_TOL:
        failures.append(f"|rho_mn|^2 exceeds rho_mm rho_nn by {cs:.3g}")
    return StateDiagnostics(
        hermiticity_defect=hermiticity,
        trace_defect=trace_defect,
        min_eigenvalue=min_eig,
        cauchy_schwarz_violation=cs,
        passed=not failures,
        failures=failures,
    )


def require_valid(rho: DensityMatrix, warn_only: bool = False) -> StateDiagnostics:
    """validate() that raises InvalidStateError (or only logs, when warn_only)."""
    diagnostics = validate(rho)
    if not diagnostics.passed:
        message = f"state '{rho.label}' fails validation: " + "; ".join(diagnostics.failures)
        if not warn_only:
            raise InvalidStateError(message)
        logger.warning(message)
    return diagnostics


def transformed_sequence(rho: DensityMatrix, lam: float, k: int) -> np.ndarray:
    """ρ̃_n = ρ_{n+k,n} λ^n √((n+k)! n!), n = 0..D-1-k."""
    diag = rho.diagonal(k)
    n = np.arange(diag.size)
    log_growth = np.array(
        [0.5 * (log_factorial(int(j) + k) + log_factorial(int(j))) for j in n]
    )
    powers = np.array([complex(lam) ** int(j) for j in n], dtype=np.complex128)
    return np.asarray(diag * powers * np.exp(log_growth))
