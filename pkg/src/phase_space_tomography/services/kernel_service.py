"""Generalized Markov kernel: λ-distributions built directly from quadrature densities."""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from phase_space_tomography.constants import (
    DECAY_EDGE_TOL,
    KERNEL_HERMITE_NODES,
    KERNEL_SERIES_REL_TOL,
    KERNEL_SERIES_STOP_RUN,
    THETA_POINTS,
)
from phase_space_tomography.exceptions import ConsistencyError, TruncationError
from phase_space_tomography.models.distribution import CoordinateKind, DistributionGrid, GridSpec
from phase_space_tomography.models.kernel import KernelSpec
from phase_space_tomography.numerics.quadrature import gauss_hermite, theta_grid
from phase_space_tomography.numerics.special import (
    PI_QUARTER,
    scaled_hermite_iter,
    y_complex,
    y_derivative,
)
from phase_space_tomography.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

DensityFn = Callable[[np.ndarray, float], np.ndarray]


def kernel_closed_form(lam: complex, y: np.ndarray) -> np.ndarray:
    """M^{0,0}_λ(y) = ((1+λ)/(1-λ))·Y(√((1+λ)/(1-λ))·y)."""
    lam = complex(lam)
    rate = (1.0 + lam) / (1.0 - lam)
    y = np.asarray(y, dtype=np.float64)
    if lam.imag == 0.0:
        return (rate.real * y_derivative(0, math.sqrt(rate.real) * y)).astype(np.complex128)
    return rate * y_complex(np.sqrt(rate) * y)


def kernel_series(lam: complex, y: np.ndarray, max_terms: int) -> np.ndarray:
    """(1-λ) Σ_k (λ-1)^k k!/(2^k (2k)!) H_2k(y), summed through scaled Hermite functions.

    Stops once 30 consecutive terms are below 1e-15 of the running sum.
    """
    lam = complex(lam)
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    base = lam - 1.0
    log_base = math.log(abs(base))
    phase = base / abs(base)
    total = np.zeros(y.shape, dtype=np.complex128)
    small_run = np.zeros(y.shape, dtype=np.int64)
    functions = scaled_hermite_iter(y)
    for k in range(max_terms):
        cur, log_scale = next(functions)
        log_coeff = gammaln(k + 1) - 0.5 * gammaln(2 * k + 1) + k * log_base
        term = phase**k * PI_QUARTER**-1 * np.exp(log_coeff + log_scale) * cur
        total = total + term
        small = np.abs(term) <= KERNEL_SERIES_REL_TOL * np.abs(total)
        small_run = np.where(small, small_run + 1, 0)
        if np.all(small_run >= KERNEL_SERIES_STOP_RUN):
            break
        next(functions)
    else:
        raise TruncationError(
            f"Markov kernel series at lambda={lam} did not settle within {max_terms} terms"
        )
    return (1.0 - lam) * total


def kernel_offset(q: float, p: float, theta: np.ndarray) -> np.ndarray:
    """a = q cos θ + p sin θ."""
    theta = np.asarray(theta, dtype=np.float64)
    return q * np.cos(theta) + p * np.sin(theta)


def markov_kernel(
    spec: KernelSpec, x: np.ndarray, theta: np.ndarray, method: str = "auto"
) -> np.ndarray:
    """M^{q,p}_λ(x, θ) = M^{0,0}_λ(x - q cos θ - p sin θ).

    ``method`` is "closed" (Dawson form), "series" (Hermite series) or "auto", which
    takes the closed form for real λ and the series otherwise.
    """
    x, theta = np.broadcast_arrays(
        np.asarray(x, dtype=np.float64), np.asarray(theta, dtype=np.float64)
    )
    y = x - kernel_offset(spec.q, spec.p, theta)
    if method == "auto":
        method = "closed" if spec.lam_im == 0.0 else "series"
    if method == "closed":
        return kernel_closed_form(spec.lam, y)
    if method == "series":
        return kernel_series(spec.lam, y, spec.max_terms).reshape(y.shape)
    raise ValueError(f"unknown kernel evaluation method '{method}'")


def _cartesian_points(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    first, second = grid.mesh()
    if grid.coords == CoordinateKind.CARTESIAN:
        return first, second
    # z = r exp(iθ) = (q + ip)/√2
    return math.sqrt(2.0) * first * np.cos(second), math.sqrt(2.0) * first * np.sin(second)


def _check_decay(table: np.ndarray) -> None:
    peak = float(np.max(np.abs(table)))
    edge = float(np.max(np.abs(table[:, [0, -1]])))
    if peak == 0.0 or edge > DECAY_EDGE_TOL * peak:
        raise ConsistencyError(
            f"quadrature densities do not decay at the outer Gauss–Hermite nodes "
            f"(edge/peak = {edge / peak if peak else math.inf:.3g})"
        )


def lambda_from_quadratures(
    density: DensityFn,
    lam: complex,
    grid: GridSpec,
    nodes: int = KERNEL_HERMITE_NODES,
    angles: int = THETA_POINTS,
    label: Optional[str] = None,
) -> DistributionGrid:
    """W^λ(q, p) = ∫∫ M^{q,p}_λ(x, θ) W^qd(x, θ) dx dθ/2π on a grid.

    x is summed with Gauss–Hermite weights times exp(x²); θ with a uniform trapezoid.
    The kernel is always evaluated in its Dawson form, continued to complex λ.
    """
    try:
        spec = KernelSpec(lam_re=complex(lam).real, lam_im=complex(lam).imag)
        x, _, scaled_weights = gauss_hermite(nodes)
        thetas, theta_weights = theta_grid(angles)
        table = np.vstack(parallel_map(lambda t: np.asarray(density(x, t)), list(thetas)))
        _check_decay(table)
        weighted = table * scaled_weights[None, :] * theta_weights[:, None] / (2.0 * math.pi)
        q, p = _cartesian_points(grid)

        def row(i: int) -> np.ndarray:
            out = np.empty(q.shape[1], dtype=np.complex128)
            for j in range(q.shape[1]):
                point = spec.model_copy(update={"q": float(q[i, j]), "p": float(p[i, j])})
                kernel = markov_kernel(point, x[None, :], thetas[:, None], method="closed")
                out[j] = np.sum(kernel * weighted)
            return out

        values = np.vstack(parallel_map(row, list(range(q.shape[0]))))
        logger.info(f"Built W^{spec.lam} on a {values.shape} grid from {angles} quadrature angles")
        return DistributionGrid(
            coords=grid.coords,
            axis1=grid.axis1.points(),
            axis2=grid.axis2.points(),
            values=values,
            metadata={
                "lambda": [spec.lam_re, spec.lam_im],
                "source": label or "quadratures",
                "hermite_nodes": nodes,
                "theta_points": angles,
            },
        )
    except Exception as e:
        logger.error(f"Failed to build lambda distribution from quadratures: {e}")
        raise
