"""Reconstruction from quadrature data via Dawson-derivative moments."""

import logging
import math
import threading
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from phase_space_tomography.constants import (
    ELEMENT_TOL,
    MAX_DIM,
    MIN_HERMITE_NODES,
    NODES_PER_DERIVATIVE,
    ROUNDOFF_FACTOR,
    SAMPLED_TOL,
)
from phase_space_tomography.exceptions import GridError
from phase_space_tomography.models.distribution import (
    ProfileFamily,
    QuadratureDataset,
    RadialProfile,
)
from phase_space_tomography.models.reconstruction import (
    ElementEstimate,
    MomentTable,
    ReconstructionMethod,
    ReconstructionReport,
)
from phase_space_tomography.models.state import DensityMatrix
from phase_space_tomography.numerics.quadrature import gauss_hermite
from phase_space_tomography.numerics.special import (
    log_binomial,
    log_factorial,
    y_derivative_errors,
    y_derivatives,
)
from phase_space_tomography.providers.base import ComponentProvider
from phase_space_tomography.providers.dataset import FiniteAngleProvider, finite_angle_average
from phase_space_tomography.services import state_service
from phase_space_tomography.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


def c_coefficient(l: int, n: int, k: int) -> float:
    """c_ln(k) = (-1)^(l+n+k) 2^(k/2+l) (k+l)! √(n!/(n+k)!) C(l, n); zero for n > l."""
    if min(l, n, k) < 0:
        raise ValueError(f"indices must be >= 0, got l={l}, n={n}, k={k}")
    if n > l:
        return 0.0
    log_value = (
        (0.5 * k + l) * LN2
        + log_factorial(k + l)
        + 0.5 * (log_factorial(n) - log_factorial(n + k))
        + log_binomial(l, n)
    )
    return float((-1) ** (l + n + k) * math.exp(log_value))


def node_count(order: int) -> int:
    """Gauss–Hermite nodes for derivative order k + 2l."""
    return max(MIN_HERMITE_NODES, NODES_PER_DERIVATIVE * order)


class MomentCache:
    """Thread-safe cache of moments keyed by (k, l, node count)."""

    def __init__(self) -> None:
        self._values: Dict[Tuple[int, int, int], complex] = {}
        self._lock = threading.Lock()

    def get_or_compute(self, key: Tuple[int, int, int], fn: Callable[[], complex]) -> complex:
        with self._lock:
            if key in self._values:
                return self._values[key]
        value = fn()
        with self._lock:
            self._values.setdefault(key, value)
            return self._values[key]

    def __len__(self) -> int:
        with self._lock:
            return len(self._values)


def _check_coverage(profile: RadialProfile, nodes: np.ndarray) -> None:
    if not profile.covers(nodes) and not profile.decays:
        raise GridError(
            f"sampled profile k={profile.k} does not cover the Gauss–Hermite nodes "
            f"[{nodes[0]:.3g}, {nodes[-1]:.3g}] and has no Gaussian decay at its edges"
        )


def _weighted_sum(weights: np.ndarray, ys: np.ndarray, scaled: np.ndarray) -> complex:
    # Weights underflow to 0 far out, where the recurrence for Y may overflow
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.where(weights > 0.0, weights * ys * scaled, 0.0)
    return complex(np.sum(terms))


def _moment_rounding(
    weights: np.ndarray, ys: np.ndarray, errors: np.ndarray, magnitude: np.ndarray
) -> float:
    """Rounding of one moment sum: ε·Σ|terms| plus the Y-recurrence error it carries."""
    eps = float(np.finfo(np.float64).eps)
    with np.errstate(over="ignore", invalid="ignore"):
        size = ROUNDOFF_FACTOR * (eps * np.abs(ys) + errors)
        terms = np.where(weights > 0.0, weights * size * magnitude, 0.0)
    return float(np.sum(terms))


def quad_moment(
    profile: RadialProfile, k: int, l: int, nodes: Optional[int] = None
) -> complex:
    """∫ Y^(k+2l)(x) W_k(x) dx by Gauss–Hermite on the exp(x²)-scaled component."""
    order = k + 2 * l
    count = nodes or node_count(order)
    x, weights, _ = gauss_hermite(count)
    _check_coverage(profile, x)
    ys = y_derivatives(order, x)[order]
    return _weighted_sum(weights, ys, profile.scaled(x))


def moment_table(
    provider: ComponentProvider,
    dim: int,
    nodes: Optional[int] = None,
    cache: Optional[MomentCache] = None,
) -> MomentTable:
    """All moments W_{k,l} with k + l < dim on one shared node set and Y-derivative table."""
    if dim < 1 or dim > MAX_DIM:
        raise ValueError(f"dim must be in 1..{MAX_DIM}, got {dim}")
    order = 2 * (dim - 1)
    count = nodes or node_count(order)
    x, weights, _ = gauss_hermite(count)
    ys = y_derivatives(order, x)
    errors = y_derivative_errors(order, x)
    cache = cache if cache is not None else MomentCache()

    def row(k: int) -> Tuple[List[complex], List[float]]:
        profile = provider.component(k)
        _check_coverage(profile, x)
        scaled = profile.scaled(x)
        magnitude = profile.magnitude(x)
        moments = [
            cache.get_or_compute(
                (k, l, count), lambda l=l: _weighted_sum(weights, ys[k + 2 * l], scaled)
            )
            for l in range(dim - k)
        ]
        roundings = [
            _moment_rounding(weights, ys[k + 2 * l], errors[k + 2 * l], magnitude)
            for l in range(dim - k)
        ]
        return moments, roundings

    values = np.zeros((dim, dim), dtype=np.complex128)
    roundings = np.zeros((dim, dim), dtype=np.float64)
    for k, (moments, bounds) in enumerate(parallel_map(row, list(range(dim)))):
        values[k, : len(moments)] = moments
        roundings[k, : len(bounds)] = bounds
    logger.debug(f"Moment table of order {dim} on {count} nodes")
    return MomentTable(
        values=values,
        roundings=roundings,
        node_count=count,
        x_range=(float(x[0]), float(x[-1])),
    )


def _element_weights(n: int, k: int) -> List[float]:
    log_prefactor = 0.5 * (log_factorial(n + k) - k * LN2 - log_factorial(n))
    return [
        math.exp(log_prefactor + log_binomial(n, l) - l * LN2 - log_factorial(k + l))
        for l in range(n + 1)
    ]


def element_from_moments(table: MomentTable, n: int, k: int) -> complex:
    """ρ_{n+k,n} = (-1)^k √((n+k)!/(2^k n!)) Σ_{l≤n} C(n,l) W_{k,l}/(2^l (k+l)!)."""
    weights = _element_weights(n, k)
    total = sum(w * table.get(k, l) for l, w in enumerate(weights))
    return complex((-1) ** k * total)


def element_rounding(table: MomentTable, n: int, k: int) -> float:
    """Rounding estimate of ``element_from_moments``: Σ_l |coefficient|·moment rounding."""
    if table.roundings is None:
        return 0.0
    weights = _element_weights(n, k)
    return math.fsum(w * float(table.roundings[k, l]) for l, w in enumerate(weights))


def binomial_relation(rho: DensityMatrix, k: int, l: int) -> complex:
    """Σ_{n≤l} c_ln(k) ρ_{n+k,n}, the analytic value of W_{k,l}."""
    return complex(sum(c_coefficient(l, n, k) * rho.element(n + k, n) for n in range(l + 1)))


def assemble_report(
    method: ReconstructionMethod,
    dim: int,
    estimates: List[ElementEstimate],
    tol: float,
    diagnostics: Dict,
    assumptions: List[str],
) -> ReconstructionReport:
    elements = np.zeros((dim, dim), dtype=np.complex128)
    for e in estimates:
        value = e.value if np.isfinite(e.value) else 0j
        elements[e.n, e.n + e.k] = np.conj(value)
        elements[e.n + e.k, e.n] = value
    matrix = DensityMatrix(elements=elements, label=f"{method.value} reconstruction")
    validation = state_service.validate(matrix)
    if not validation.passed:
        logger.warning(f"Reconstructed matrix fails validation: {validation.failures}")
    flagged = [e for e in estimates if e.flagged]
    if flagged:
        logger.warning(f"{len(flagged)} of {len(estimates)} elements flagged")
    return ReconstructionReport(
        method=method,
        matrix=matrix,
        elements=estimates,
        diagnostics=diagnostics,
        assumptions=assumptions,
        validation=validation,
        tolerance=tol,
    )


def _estimate(
    table: MomentTable, check: MomentTable, n: int, k: int, tol: float
) -> ElementEstimate:
    try:
        value = element_from_moments(table, n, k)
        residual = abs(value - element_from_moments(check, n, k))
        roundoff = element_rounding(table, n, k)
        if not np.isfinite(value) or not np.isfinite(residual + roundoff):
            raise ArithmeticError("non-finite moment combination")
    except Exception as e:
        logger.warning(f"Element ({n + k}, {n}) failed: {e}")
        return ElementEstimate(n=n, k=k, re=0.0, im=0.0, flagged=True, reason=str(e))
    estimate = residual + roundoff
    flagged = estimate > tol
    return ElementEstimate(
        n=n,
        k=k,
        re=value.real,
        im=value.imag,
        residual=estimate,
        flagged=flagged,
        reason=(
            f"node-doubling residual {residual:.3g} plus rounding estimate {roundoff:.3g} "
            f"exceeds {tol:g}"
            if flagged
            else None
        ),
    )


def reconstruct_full(
    provider: ComponentProvider,
    dim: int,
    tol: float = ELEMENT_TOL,
    method: ReconstructionMethod = ReconstructionMethod.QUAD_FULL,
    assumptions: Optional[List[str]] = None,
) -> ReconstructionReport:
    """Reconstruct the dim×dim block from quadrature components k ↦ W^qd_k."""
    try:
        if provider.family != ProfileFamily.QUADRATURE:
            raise ValueError("quadrature reconstruction needs quadrature components")
        if not provider.closed_form:
            tol = max(tol, SAMPLED_TOL)
        cache = MomentCache()
        table = moment_table(provider, dim, cache=cache)
        check = moment_table(provider, dim, nodes=2 * table.node_count, cache=cache)
        estimates = [
            _estimate(table, check, n, k, tol) for k in range(dim) for n in range(dim - k)
        ]
        diagnostics = {
            "quadrature": "gauss-hermite",
            "nodes": table.node_count,
            "check_nodes": check.node_count,
            "x_range": list(table.x_range),
            "provider": provider.describe(),
        }
        report = assemble_report(method, dim, estimates, tol, diagnostics, assumptions or [])
        logger.info(f"Reconstructed {dim}x{dim} matrix from quadrature components")
        return report
    except Exception as e:
        logger.error(f"Failed to reconstruct from quadrature components: {e}")
        raise


def finite_angle_component(dataset: QuadratureDataset, k: int, x: np.ndarray) -> np.ndarray:
    """W̃_k(x) = (1/p) Σ_t exp(ikθ_t) W^qd(x, θ_t) on the angles θ_t = 2πt/p."""
    if not dataset.is_equidistant():
        raise GridError(f"dataset angles are not the grid 2*pi*t/p for p={dataset.p}")
    if not 0 <= k < dataset.p:
        raise ValueError(f"k must be in 0..{dataset.p - 1}, got {k}")
    return finite_angle_average(dataset, k, x)


def reconstruct_finite(
    dataset: QuadratureDataset, tol: float = ELEMENT_TOL
) -> ReconstructionReport:
    """p×p reconstruction from the p quadratures at angles 2πt/p.

    Assumes ρ_mn = 0 for m, n ≥ p. For even p the angles come in antipodal pairs and
    components k and p-k alias, so every off-diagonal element is flagged.
    """
    provider = FiniteAngleProvider(dataset)
    p = dataset.p
    assumptions = [
        f"rho_mn = 0 for m, n >= {p}; not checkable from the {p} measured quadratures"
    ]
    report = reconstruct_full(
        provider, p, tol, method=ReconstructionMethod.QUAD_FINITE, assumptions=assumptions
    )
    if p % 2 == 0 and p > 1:
        reason = (
            f"even p={p}: angles theta and theta+pi carry the same information, so "
            f"components k and p-k alias"
        )
        for e in report.elements:
            if e.k >= 1:
                e.flagged = True
                e.reason = reason if not e.reason else f"{e.reason}; {reason}"
        report.assumptions.append(reason)
    report.diagnostics["angles"] = p
    return report
