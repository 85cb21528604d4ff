"""Reconstruction from λ-distributions: integration, differentiation and the Q-function case."""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from phase_space_tomography.constants import (
    DECAY_TOL,
    DECAY_WINDOW,
    DIFFERENTIATION_WINDOW,
    ELEMENT_TOL,
    FIT_POINTS_PER_ORDER,
    LAGUERRE_NODES,
    MAX_FIT_CONDITION,
    MAX_TRUNCATION_ORDER,
    ROUNDOFF_FACTOR,
    SAMPLED_TOL,
)
from phase_space_tomography.exceptions import (
    GridError,
    IllConditionedError,
    TruncationError,
    ValidityWindowError,
)
from phase_space_tomography.models.distribution import ProfileFamily, ProfileKind, RadialProfile
from phase_space_tomography.models.reconstruction import (
    DivergenceReport,
    DivergenceTrend,
    ElementEstimate,
    ReconstructionMethod,
    ReconstructionReport,
    TaylorCoefficients,
    TaylorSource,
)
from phase_space_tomography.models.state import DensityMatrix, LambdaParam
from phase_space_tomography.numerics.quadrature import gauss_laguerre, gauss_legendre
from phase_space_tomography.numerics.special import log_binomial, log_factorial
from phase_space_tomography.providers.base import ComponentProvider
from phase_space_tomography.services.forward_service import (
    klambda_coefficients,
    klambda_kernel_scaled,
)
from phase_space_tomography.services.quadrature_service import assemble_report
from phase_space_tomography.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

DIVERGENCE_NODES = 256


def _check_profile(profile: RadialProfile, lam: float) -> None:
    if profile.family != ProfileFamily.LAMBDA:
        raise ValueError(f"expected a lambda-distribution component, got {profile.family.value}")
    if profile.lam is not None and not math.isclose(profile.lam, lam, abs_tol=1e-15):
        raise ValueError(f"profile was generated for lambda={profile.lam}, not {lam}")


# =============================================================================
# Integration method
# =============================================================================


def _integration_terms(
    profile: RadialProfile, lam: float, n: int, k: int, nodes: int
) -> Tuple[complex, float]:
    """Element value and its rounding estimate ε·Σ|terms| from one Gauss–Laguerre rule."""
    rate = 2.0 - lam - 1.0 / lam
    x, weights = gauss_laguerre(nodes, float(k))
    r = np.sqrt(x / rate)
    # K^(1/λ)_{n,n+k}·exp((1-1/λ)r²), stripped of the r^k the weight already carries
    inverse_kernel = klambda_kernel_scaled(n, n + k, 1.0 / lam, r) / x**k
    terms = weights * profile.scaled(r) * inverse_kernel
    scale = weights * profile.magnitude(r) * np.abs(inverse_kernel)
    # r dr = dx / (2·rate); the 2 in front of the integral cancels
    value = complex(np.sum(terms) / rate)
    roundoff = ROUNDOFF_FACTOR * float(np.finfo(np.float64).eps) * float(np.sum(scale)) / rate
    return value, roundoff


def _integration_value(profile: RadialProfile, lam: float, n: int, k: int, nodes: int) -> complex:
    return _integration_terms(profile, lam, n, k, nodes)[0]


def _require_integrable(profile: RadialProfile, lam: float, k: int) -> None:
    LambdaParam(real=lam).require_integration_window()
    _check_profile(profile, lam)
    if profile.k != k:
        raise ValueError(f"profile holds component {profile.k}, not {k}")
    if profile.kind == ProfileKind.SAMPLED and not profile.decays:
        edge = float(profile.grid[-1])  # type: ignore[index]
        raise GridError(
            f"sampled profile k={k} does not decay at r={edge:.3g}; "
            "the radial integral needs the full half-line"
        )


def reconstruct_integration(
    profile: RadialProfile, lam: float, n: int, k: int, nodes: int = LAGUERRE_NODES
) -> complex:
    """ρ_{n+k,n} = 2∫ W^λ_k(r) K^(1/λ)_{n,n+k}(r) r dr for λ ∈ (-1, 0).

    With x = (2-λ-1/λ)r² the integrand carries the weight x^k exp(-x) and is summed by
    generalized Gauss–Laguerre.
    """
    _require_integrable(profile, lam, k)
    return _integration_value(profile, lam, n, k, nodes)


def reconstruct_integration_matrix(
    provider: ComponentProvider,
    lam: float,
    dim: int,
    tol: float = ELEMENT_TOL,
    nodes: int = LAGUERRE_NODES,
) -> ReconstructionReport:
    """All elements n + k < dim by the integration method; residual from doubled nodes."""
    try:
        LambdaParam(real=lam).require_integration_window()
        if not provider.closed_form:
            tol = max(tol, SAMPLED_TOL)

        def row(k: int) -> List[ElementEstimate]:
            profile = provider.component(k)
            estimates = []
            for n in range(dim - k):
                try:
                    _require_integrable(profile, lam, k)
                    value, roundoff = _integration_terms(profile, lam, n, k, nodes)
                    residual = abs(value - _integration_value(profile, lam, n, k, 2 * nodes))
                except (GridError, ArithmeticError) as e:
                    logger.warning(f"Element ({n + k}, {n}) failed: {e}")
                    estimates.append(
                        ElementEstimate(n=n, k=k, re=0.0, im=0.0, flagged=True, reason=str(e))
                    )
                    continue
                estimate = residual + roundoff
                flagged = estimate > tol
                estimates.append(
                    ElementEstimate(
                        n=n,
                        k=k,
                        re=value.real,
                        im=value.imag,
                        residual=estimate,
                        flagged=flagged,
                        reason=(
                            f"node-doubling residual {residual:.3g} plus rounding estimate "
                            f"{roundoff:.3g} exceeds {tol:g}"
                            if flagged
                            else None
                        ),
                    )
                )
            return estimates

        estimates = [e for rows in parallel_map(row, list(range(dim))) for e in rows]
        diagnostics = {
            "quadrature": "gauss-laguerre",
            "nodes": nodes,
            "rate": 2.0 - lam - 1.0 / lam,
            "provider": provider.describe(),
        }
        assumptions = [
            "the Wigner-point condition sum_n |rho_{n+k,n}| sqrt((n+k)!/n!) < inf is not "
            "checkable from distribution data and is not gated"
        ]
        report = assemble_report(
            ReconstructionMethod.LAMBDA_INT, dim, estimates, tol, diagnostics, assumptions
        )
        logger.info(f"Reconstructed {dim}x{dim} matrix by integration at lambda={lam}")
        return report
    except Exception as e:
        logger.error(f"Failed to reconstruct by integration at lambda={lam}: {e}")
        raise


def divergence_probe(lam: float, cutoffs: Sequence[float]) -> DivergenceReport:
    """Vacuum ρ_00 integral 2(1-λ)(1-1/λ)∫_0^R exp(-(1-λ)(1-1/λ)r²) r dr for each cutoff R."""
    if not -1.0 < lam < 1.0 or lam == 0.0:
        raise ValidityWindowError(
            f"divergence probe needs real lambda in (-1, 0) or (0, 1), got {lam}"
        )
    if not cutoffs or any(c <= 0 for c in cutoffs):
        raise ValueError("cutoffs must be positive")
    rate = (1.0 - lam) * (1.0 - 1.0 / lam)
    vacuum = klambda_coefficients(0, 0, lam)
    inverse = klambda_coefficients(0, 0, 1.0 / lam)
    values = []
    for cutoff in sorted(cutoffs):
        r, weights = gauss_legendre(DIVERGENCE_NODES, 0.0, float(cutoff))
        integrand = (
            np.real(vacuum[0] * inverse[0]) * np.exp(-(2.0 - lam - 1.0 / lam) * r**2) * r
        )
        values.append(float(2.0 * np.sum(weights * integrand)))
    # λ ∈ (0, 1) gives 1 - exp(|c|R²): negative and unbounded, so growth is in magnitude
    sizes = [abs(v) for v in values]
    increasing = all(b > a for a, b in zip(sizes, sizes[1:]))
    if len(values) >= 2 and increasing and sizes[-1] > 2.0 * sizes[-2]:
        trend = DivergenceTrend.DIVERGENT
    elif abs(values[-1] - 1.0) < 1e-8:
        trend = DivergenceTrend.CONVERGENT
    else:
        trend = DivergenceTrend.INCONCLUSIVE
    logger.info(f"Divergence probe at lambda={lam}: {trend.value}")
    return DivergenceReport(
        lam=lam, rate=rate, cutoffs=sorted(float(c) for c in cutoffs), values=values, trend=trend
    )


# =============================================================================
# Taylor coefficients
# =============================================================================


def taylor_from_state(
    rho: DensityMatrix, lam: float, k: int, order: Optional[int] = None
) -> TaylorCoefficients:
    """Exact coefficients a_j of exp((1-λ)r²)·W^λ_k(r) for a finite state.

    a_{2u+k} = Σ_{n≥u} ρ_{n+k,n} √(n!/(n+k)!) (1-λ)^(k+1) λ^(n-u)/u! C(n+k, n-u) (1-λ)^(2u).
    The table is complete: it holds every nonzero coefficient up to ``order``.
    """
    LambdaParam(real=lam)
    support = k + 2 * max(rho.dim - 1 - k, 0)
    order = support if order is None else order
    coeffs = np.zeros(max(order, k) + 1, dtype=np.complex128)
    for n, value in enumerate(rho.diagonal(k)):
        if value == 0:
            continue
        poly = klambda_coefficients(n, n + k, lam)
        length = min(poly.size, coeffs.size)
        coeffs[:length] += value * poly[:length]
    return TaylorCoefficients(
        k=k,
        lam=lam,
        coefficients=coeffs,
        source=TaylorSource.ANALYTIC,
        complete=order >= support,
    )


def _design(points: np.ndarray, k: int, order: int, scale: float) -> np.ndarray:
    powers = np.arange(k, order + 1, 2)
    return (points[:, None] / scale) ** powers[None, :]


def taylor_from_samples(
    profile: RadialProfile,
    lam: float,
    k: int,
    order: int,
    r_fit: float = DIFFERENTIATION_WINDOW,
) -> TaylorCoefficients:
    """Least-squares fit of exp((1-λ)r²)·W^λ_k(r) on [0, r_fit] by Σ_j a_{k+2j} r^(k+2j)."""
    _check_profile(profile, lam)
    if not 0.0 < r_fit <= DIFFERENTIATION_WINDOW:
        raise ValueError(f"fit window must be in (0, {DIFFERENTIATION_WINDOW}], got {r_fit}")
    if order < k:
        raise ValueError(f"order {order} below the angular index {k}")
    needed = FIT_POINTS_PER_ORDER * order
    if profile.kind == ProfileKind.SAMPLED:
        assert profile.grid is not None
        points = profile.grid[profile.grid <= r_fit]
        if points.size < needed:
            raise GridError(
                f"fit of order {order} needs {needed} samples on [0, {r_fit}], got {points.size}"
            )
    else:
        points = np.linspace(0.0, r_fit, max(needed, 64))
    design = _design(points, k, order, r_fit)
    condition = float(np.linalg.cond(design))
    if condition > MAX_FIT_CONDITION:
        smaller = order - 2
        while (
            smaller >= k
            and np.linalg.cond(_design(points, k, smaller, r_fit)) > MAX_FIT_CONDITION
        ):
            smaller -= 2
        hint = f"; try order {smaller}" if smaller >= k else ""
        raise IllConditionedError(
            f"Taylor fit of order {order} has condition number {condition:.3g} > "
            f"{MAX_FIT_CONDITION:g}{hint}"
        )
    target = profile.scaled(points)
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    coeffs = np.zeros(order + 1, dtype=np.complex128)
    powers = np.arange(k, order + 1, 2)
    coeffs[powers] = solution / r_fit**powers
    logger.debug(f"Fitted Taylor table k={k} order={order} cond={condition:.3g}")
    return TaylorCoefficients(
        k=k,
        lam=lam,
        coefficients=coeffs,
        source=TaylorSource.FITTED,
        complete=False,
        condition_number=condition,
    )


def derivative_moment(coeffs: TaylorCoefficients, l: int) -> complex:
    """W^λ_{k,l}: l-th r-derivative of exp((1-λ)r²)·W^λ_k at r = 0."""
    return coeffs.derivative(l)


# =============================================================================
# Differentiation method
# =============================================================================


def tail_bound(lam: float, offset: int, n: int, truncation: int) -> float:
    """Majorant ((K+l)!/(K-n)!)·(1-|λ|)^(-(l+1))·(|λ|/(1-|λ|))^K of the inversion remainder.

    K is the truncation index and l the angular offset; the bound is on the transformed
    element ρ̃ and decays geometrically once |λ| < 1/2.
    """
    if truncation < n:
        raise ValueError(f"truncation {truncation} below n={n}")
    size = abs(lam)
    if size == 0.0:
        return 0.0 if truncation >= 1 else math.factorial(offset)
    if size >= 1.0:
        return math.inf
    log_bound = (
        log_factorial(truncation + offset)
        - log_factorial(truncation - n)
        - (offset + 1) * math.log(1.0 - size)
        + truncation * math.log(size / (1.0 - size))
    )
    return math.exp(log_bound) if log_bound < 700 else math.inf


def element_tail_bound(lam: float, k: int, n: int, truncation: int) -> float:
    """tail_bound expressed for ρ_{n+k,n} itself (divided by |λ|^n √((n+k)! n!))."""
    bound = tail_bound(lam, k, n, truncation)
    if bound == 0.0 or math.isinf(bound):
        return bound
    log_scale = n * math.log(abs(lam)) + 0.5 * (log_factorial(n + k) + log_factorial(n))
    return math.exp(math.log(bound) - log_scale)


def decay_condition_check(
    sequence: Sequence[complex],
    finite_support: bool = False,
    window: int = DECAY_WINDOW,
    tol: float = DECAY_TOL,
) -> bool:
    """Whether |x_n| is eventually decreasing below tol·max|x| within the available window.

    Finitely supported sequences (finite state matrices) always pass.
    """
    if finite_support:
        return True
    magnitudes = np.abs(np.asarray(sequence, dtype=np.complex128))
    if magnitudes.size == 0:
        return True
    peak = float(np.max(magnitudes))
    if peak == 0.0:
        return True
    tail = magnitudes[-min(window, magnitudes.size) :]
    decreasing = bool(np.all(np.diff(tail) <= 0.0))
    return decreasing and float(tail[-1]) <= tol * peak


def _check_differentiation_window(
    lam: float,
    coeffs: TaylorCoefficients,
    allow_override: bool,
    decay_sequence: Optional[Sequence[complex]],
) -> None:
    LambdaParam(real=lam).require_differentiation_window(allow_override)
    if abs(lam) < 0.5:
        return
    if coeffs.complete:
        return
    if decay_sequence is None or not decay_condition_check(decay_sequence):
        raise ValidityWindowError(
            f"differentiation override at |lambda| = {abs(lam)} >= 1/2 needs a transformed "
            "sequence rho_{n+k,n} lambda^n sqrt((n+k)! n!) that decays to 0 (or a finite state)"
        )


def choose_truncation(
    lam: float, k: int, n: int, coeffs: TaylorCoefficients, tol: float
) -> Tuple[int, float]:
    """Smallest P ≥ n with element tail bound below tol, capped at 200.

    Complete tables end at their support, where the sum terminates exactly.
    """
    support = coeffs.support_end
    if coeffs.complete and support <= MAX_TRUNCATION_ORDER:
        return max(support, n), 0.0
    available = (coeffs.order - k) // 2
    if lam == 0.0:
        return n, 0.0
    for truncation in range(n, min(MAX_TRUNCATION_ORDER, available) + 1):
        bound = element_tail_bound(lam, k, n, truncation)
        if bound < tol:
            return truncation, bound
    bound = element_tail_bound(lam, k, n, min(MAX_TRUNCATION_ORDER, available))
    raise TruncationError(
        f"tail bound for rho_({n + k},{n}) at lambda={lam} is {bound:.3g} after "
        f"{min(MAX_TRUNCATION_ORDER, available)} terms, above tol {tol:g}"
    )


def _differentiation_terms(
    coeffs: TaylorCoefficients, lam: float, n: int, k: int, last: int
) -> Tuple[complex, float]:
    log_front = 0.5 * (log_factorial(n) - log_factorial(n + k))
    log_base = math.log(1.0 - lam)
    total = 0j
    size = 0.0
    for p in range(n, last + 1):
        a = coeffs.coefficient(2 * p + k)
        if a == 0:
            continue
        log_coeff = (
            log_front
            + log_binomial(p, n)
            + log_factorial(p + k)
            - (2 * p + k + 1) * log_base
        )
        term = math.exp(log_coeff) * (-lam) ** (p - n) * a
        total += term
        size += abs(term)
    return total, size


def _differentiation_sum(
    coeffs: TaylorCoefficients, lam: float, n: int, k: int, last: int
) -> complex:
    return _differentiation_terms(coeffs, lam, n, k, last)[0]


def reconstruct_differentiation(
    coeffs: TaylorCoefficients,
    lam: float,
    n: int,
    k: int,
    tol: float = ELEMENT_TOL,
    allow_override: bool = False,
    decay_sequence: Optional[Sequence[complex]] = None,
) -> complex:
    """ρ_{n+k,n} = √(n!/(n+k)!) Σ_{p≥n} C(p,n) (p+k)! (-λ)^(p-n)/(1-λ)^(2p+k+1) a_{2p+k}."""
    return differentiation_estimate(coeffs, lam, n, k, tol, allow_override, decay_sequence).value


def differentiation_estimate(
    coeffs: TaylorCoefficients,
    lam: float,
    n: int,
    k: int,
    tol: float = ELEMENT_TOL,
    allow_override: bool = False,
    decay_sequence: Optional[Sequence[complex]] = None,
) -> ElementEstimate:
    """Differentiation-method element with its truncation order and tail bound."""
    if coeffs.k != k:
        raise ValueError(f"Taylor table holds component {coeffs.k}, not {k}")
    _check_differentiation_window(lam, coeffs, allow_override, decay_sequence)
    if lam == 0.0:
        value = q_function_element(coeffs, n, k)
        return ElementEstimate(n=n, k=k, re=value.real, im=value.imag, residual=0.0, truncation=n)
    if abs(lam) >= 0.5 and not coeffs.complete:
        last = max(n, (coeffs.order - k) // 2)
        bound = math.nan
    else:
        last, bound = choose_truncation(lam, k, n, coeffs, tol)
    value, size = _differentiation_terms(coeffs, lam, n, k, last)
    roundoff = ROUNDOFF_FACTOR * float(np.finfo(np.float64).eps) * size
    residual = None if math.isnan(bound) else bound + roundoff
    flagged = roundoff > tol or (residual is not None and residual > tol)
    return ElementEstimate(
        n=n,
        k=k,
        re=value.real,
        im=value.imag,
        residual=residual,
        truncation=last,
        flagged=flagged,
        reason=f"rounding estimate {roundoff:.3g} exceeds {tol:g}" if flagged else None,
    )


def q_function_element(coeffs: TaylorCoefficients, n: int, k: int) -> complex:
    """λ = 0: ρ_{n+k,n} = √(n!(n+k)!)·a_{2n+k}, the single surviving term."""
    log_front = 0.5 * (log_factorial(n) + log_factorial(n + k))
    return math.exp(log_front) * coeffs.coefficient(2 * n + k)


def _taylor_table(
    provider: ComponentProvider, lam: float, k: int, dim: int, order: Optional[int]
) -> TaylorCoefficients:
    if provider.state is not None:
        return taylor_from_state(provider.state, lam, k)
    fit_order = order if order is not None else k + 2 * max(dim - 1 - k, 0)
    fit_order = max(fit_order - (fit_order - k) % 2, k)
    return taylor_from_samples(provider.component(k), lam, k, fit_order)


def reconstruct_differentiation_matrix(
    provider: ComponentProvider,
    lam: float,
    dim: int,
    tol: float = ELEMENT_TOL,
    allow_override: bool = False,
    order: Optional[int] = None,
    decay_sequences: Optional[Dict[int, Sequence[complex]]] = None,
    method: ReconstructionMethod = ReconstructionMethod.LAMBDA_DIFF,
) -> ReconstructionReport:
    """All elements n + k < dim by the differentiation method.

    Tables come from the provider's state when it has one, else from polynomial fits.
    """
    try:
        LambdaParam(real=lam).require_differentiation_window(allow_override)
        if not provider.closed_form:
            tol = max(tol, SAMPLED_TOL)

        def row(k: int) -> Tuple[List[ElementEstimate], Dict]:
            try:
                table = _taylor_table(provider, lam, k, dim, order)
            except (IllConditionedError, GridError) as e:
                logger.warning(f"Taylor table k={k} failed: {e}")
                failed = [
                    ElementEstimate(n=n, k=k, re=0.0, im=0.0, flagged=True, reason=str(e))
                    for n in range(dim - k)
                ]
                return failed, {"k": k, "error": str(e)}
            sequence = (decay_sequences or {}).get(k)
            estimates = []
            for n in range(dim - k):
                try:
                    estimates.append(
                        differentiation_estimate(
                            table, lam, n, k, tol, allow_override, sequence
                        )
                    )
                except TruncationError as e:
                    logger.warning(f"Element ({n + k}, {n}) not converged: {e}")
                    last = max(n, (table.order - k) // 2)
                    value = _differentiation_sum(table, lam, n, k, last)
                    estimates.append(
                        ElementEstimate(
                            n=n,
                            k=k,
                            re=value.real,
                            im=value.imag,
                            truncation=last,
                            flagged=True,
                            reason=f"partial sum over the fitted table; {e}",
                        )
                    )
            info = {
                "k": k,
                "source": table.source.value,
                "order": table.order,
                "complete": table.complete,
                "condition_number": table.condition_number,
            }
            return estimates, info

        results = parallel_map(row, list(range(dim)))
        estimates = [e for rows, _ in results for e in rows]
        diagnostics = {
            "lambda": lam,
            "override": allow_override,
            "tables": [info for _, info in results],
            "provider": provider.describe(),
        }
        assumptions = []
        if abs(lam) >= 0.5:
            assumptions.append(
                "|lambda| >= 1/2: valid only because the transformed sequence decays "
                "(finite state or checked decay)"
            )
        report = assemble_report(method, dim, estimates, tol, diagnostics, assumptions)
        logger.info(f"Reconstructed {dim}x{dim} matrix by differentiation at lambda={lam}")
        return report
    except Exception as e:
        logger.error(f"Failed to reconstruct by differentiation at lambda={lam}: {e}")
        raise


def reconstruct_q_function(
    provider: ComponentProvider, dim: int, tol: float = ELEMENT_TOL
) -> ReconstructionReport:
    """Differentiation method at λ = 0 (single-term formula)."""
    if provider.lam not in (None, 0.0):
        raise ValidityWindowError(
            f"q-function reconstruction reads the lambda = 0 distribution, got {provider.lam}"
        )
    return reconstruct_differentiation_matrix(
        provider, 0.0, dim, tol, method=ReconstructionMethod.Q_FUNCTION
    )
