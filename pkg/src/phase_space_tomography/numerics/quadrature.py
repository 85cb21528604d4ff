"""Cached quadrature rules.

Arrays returned here are shared between callers and are read-only.
"""

import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import roots_genlaguerre, roots_hermite, roots_legendre

from phase_space_tomography.numerics.special import hermite_functions

Rule = Tuple[np.ndarray, np.ndarray]


def _frozen(*arrays: np.ndarray) -> Tuple[np.ndarray, ...]:
    for arr in arrays:
        arr.setflags(write=False)
    return arrays


@lru_cache(maxsize=32)
def gauss_hermite(count: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes, weights for exp(-x²), and the scaled weights w_i·exp(x_i²).

    The scaled weights come from the Christoffel function 1/Σ_{n<N} h_n(x_i)², which
    stays finite at nodes where w_i itself underflows.
    """
    if count < 1:
        raise ValueError(f"node count must be >= 1, got {count}")
    nodes, weights = roots_hermite(count)
    functions = hermite_functions(count - 1, nodes)
    scaled = 1.0 / np.sum(functions**2, axis=0)
    return _frozen(np.asarray(nodes), np.asarray(weights), scaled)  # type: ignore[return-value]


@lru_cache(maxsize=64)
def gauss_laguerre(count: int, alpha: float = 0.0) -> Rule:
    """Nodes and weights for the weight x^α exp(-x) on [0, ∞)."""
    if count < 1:
        raise ValueError(f"node count must be >= 1, got {count}")
    nodes, weights = roots_genlaguerre(count, alpha)
    return _frozen(np.asarray(nodes), np.asarray(weights))  # type: ignore[return-value]


@lru_cache(maxsize=32)
def _legendre(count: int) -> Rule:
    nodes, weights = roots_legendre(count)
    return _frozen(np.asarray(nodes), np.asarray(weights))  # type: ignore[return-value]


def gauss_legendre(count: int, start: float, stop: float) -> Rule:
    """Legendre rule mapped onto [start, stop]."""
    nodes, weights = _legendre(count)
    half = 0.5 * (stop - start)
    return start + half * (nodes + 1.0), half * weights


@lru_cache(maxsize=16)
def theta_grid(count: int) -> Rule:
    """Equispaced angles 2πt/count with trapezoid weights 2π/count (exact for trig polynomials)."""
    if count < 1:
        raise ValueError(f"angle count must be >= 1, got {count}")
    angles = 2.0 * math.pi * np.arange(count) / count
    weights = np.full(count, 2.0 * math.pi / count)
    return _frozen(angles, weights)  # type: ignore[return-value]
