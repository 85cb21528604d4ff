"""Binomial inversion and the banded formal-inverse counterexample."""

import logging
from typing import Callable, List, Sequence

import numpy as np
from scipy.special import comb

from phase_space_tomography.constants import DECAY_TOL, FORMAL_INVERSE_WINDOW
from phase_space_tomography.models.reconstruction import FormalInverseCase, FormalInverseReport

logger = logging.getLogger(__name__)


def _alternating_binomial(length: int) -> np.ndarray:
    """Lower-triangular matrix (-1)^j C(i, j)."""
    i = np.arange(length)[:, None]
    j = np.arange(length)[None, :]
    return np.where(j <= i, (-1.0) ** j * comb(i, j), 0.0)


def binomial_forward(x: Sequence[complex]) -> np.ndarray:
    """y_l = Σ_{n≤l} (-1)^n C(l, n) x_n."""
    x = np.asarray(x, dtype=np.complex128)
    return _alternating_binomial(x.size) @ x


def binomial_invert(y: Sequence[complex]) -> np.ndarray:
    """x_n = Σ_{l≤n} (-1)^l C(n, l) y_l; the pair is an involution on finite sequences."""
    y = np.asarray(y, dtype=np.complex128)
    return _alternating_binomial(y.size) @ y


def banded_forward(x: np.ndarray) -> np.ndarray:
    """y_l = x_l + x_{l+1}; needs one more x than it returns."""
    return x[:-1] + x[1:]


def formal_inverse_partial_sums(y: np.ndarray, n: int) -> np.ndarray:
    """Partial sums Σ_{m=n}^{M} (-1)^(m-n) y_m of the would-be inverse."""
    signs = (-1.0) ** np.arange(y.size - n)
    return np.cumsum(signs * y[n:])


def _run_case(
    name: str, x_of: Callable[[np.ndarray], np.ndarray], window: int
) -> FormalInverseCase:
    x = x_of(np.arange(window + 1))
    y = banded_forward(x)
    recovered = np.array([formal_inverse_partial_sums(y, n)[-1] for n in range(window)])
    sums = formal_inverse_partial_sums(y, 0)
    trailing = sums[-max(4, window // 4) :]
    oscillation = float(np.max(trailing) - np.min(trailing))
    converged = bool(np.max(np.abs(y[-max(4, window // 4) :])) <= DECAY_TOL)
    error = float(np.max(np.abs(recovered - x[:window])))
    recovers = converged and error <= DECAY_TOL
    if not converged:
        detail = f"inverse series diverges: partial sums oscillate with amplitude {oscillation:g}"
    elif not recovers:
        detail = f"inverse series converges but misses x by {error:.3g}"
    else:
        detail = f"inverse recovers x to {error:.3g}"
    logger.debug(f"Formal inverse case {name}: {detail}")
    return FormalInverseCase(
        name=name,
        x=x[:window].tolist(),
        y=y.tolist(),
        recovered=recovered.tolist(),
        partial_sums=sums[: min(window, 12)].tolist(),
        oscillation=oscillation,
        converged=converged,
        recovers_input=recovers,
        detail=detail,
    )


def formal_inverse_demo(window: int = FORMAL_INVERSE_WINDOW) -> FormalInverseReport:
    """Push x ≡ 1, x = (-1)^n and x = 2^(-n) through the banded formal-inverse pair.

    (a_ln) has ones on the diagonal and superdiagonal, (b_nm) = (-1)^(m-n) for m ≥ n.
    Inversion holds exactly when x_n → 0.
    """
    cases: List[FormalInverseCase] = [
        _run_case("constant", lambda n: np.ones(n.size), window),
        _run_case("alternating", lambda n: (-1.0) ** n, window),
        _run_case("geometric", lambda n: 2.0 ** (-n.astype(np.float64)), window),
    ]
    logger.info(f"Formal inverse demonstration on a window of {window}")
    return FormalInverseReport(window=window, cases=cases)
