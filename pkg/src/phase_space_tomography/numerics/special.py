"""Special functions consumed by the reconstruction formulas.

Hermite functions use the recurrence on the normalized functions with a running
log-scale, so orders up to several hundred neither overflow nor lose the Gaussian
factor. Factorial ratios are formed in log space and exponentiated once.
"""

import logging
import math
from typing import Iterator, Tuple, Union

import numpy as np
from scipy.special import dawsn, eval_genlaguerre, gammaln

from phase_space_tomography.constants import (
    EXACT_BINOMIAL_MAX,
    Y_SERIES_MAX_TERMS,
    Y_SERIES_REL_TOL,
    Y_SERIES_STOP_RUN,
)
from phase_space_tomography.exceptions import TruncationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

PI_QUARTER = math.pi**-0.25
# Rescale the running recurrence once magnitudes pass this
_RESCALE_AT = 1e100


def log_factorial(n: int) -> float:
    """log(n!)."""
    if n < 0:
        raise ValueError(f"log_factorial needs n >= 0, got {n}")
    return float(gammaln(n + 1))


def log_binomial(n: int, k: int) -> float:
    """log C(n, k) for 0 ≤ k ≤ n (-inf outside)."""
    if k < 0 or k > n or n < 0:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def binomial(n: int, k: int) -> float:
    """C(n, k); exact integer arithmetic up to n = 60, log-scaled beyond, 0 outside 0 ≤ k ≤ n."""
    if k < 0 or k > n or n < 0:
        return 0.0
    if n <= EXACT_BINOMIAL_MAX:
        return float(math.comb(n, k))
    return math.exp(log_binomial(n, k))


def _hermite_recurrence(nmax: int, x: ArrayLike, gaussian: bool) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((nmax + 1,) + x.shape, dtype=np.float64)
    log_scale = -0.5 * x**2 if gaussian else np.zeros_like(x)
    prev = np.zeros_like(x)
    cur = np.full_like(x, PI_QUARTER)
    with np.errstate(under="ignore"):
        out[0] = cur * np.exp(log_scale)
        for n in range(nmax):
            nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
            prev, cur = cur, nxt
            big = np.abs(cur) > _RESCALE_AT
            if np.any(big):
                factor = np.where(big, np.abs(cur), 1.0)
                cur = cur / factor
                prev = prev / factor
                log_scale = log_scale + np.log(factor)
            out[n + 1] = cur * np.exp(log_scale)
    return out


def hermite_functions(nmax: int, x: ArrayLike) -> np.ndarray:
    """h_0..h_nmax at x, shape (nmax + 1,) + shape(x)."""
    if nmax < 0:
        raise ValueError(f"Hermite order must be >= 0, got {nmax}")
    return _hermite_recurrence(nmax, x, gaussian=True)


def hermite_functions_scaled(nmax: int, x: ArrayLike) -> np.ndarray:
    """h_n(x)·exp(x²/2) for n = 0..nmax (the orthonormal Hermite polynomials)."""
    if nmax < 0:
        raise ValueError(f"Hermite order must be >= 0, got {nmax}")
    return _hermite_recurrence(nmax, x, gaussian=False)


def hermite_function(n: int, x: ArrayLike) -> np.ndarray:
    """h_n(x) = (2^n n! √π)^(-1/2) H_n(x) exp(-x²/2)."""
    return hermite_functions(n, x)[n]


def hermite_poly(n: int, x: ArrayLike) -> np.ndarray:
    """Physicists' Hermite polynomial H_n(x)."""
    if n < 0:
        raise ValueError(f"Hermite degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 2.0 * x
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(1, n):
            prev, cur = cur, 2.0 * x * cur - 2.0 * j * prev
    if not np.all(np.isfinite(cur)):
        raise OverflowError(f"H_{n}(x) exceeds the floating-point range for some x")
    return cur


def dawson(x: ArrayLike) -> np.ndarray:
    """Dawson's integral exp(-x²)∫₀^x exp(t²) dt."""
    return np.asarray(dawsn(np.asarray(x, dtype=np.float64)))


def _dawson_recurrence(nmax: int, x: np.ndarray, start: np.ndarray) -> np.ndarray:
    out = np.empty((nmax + 1,) + x.shape, dtype=np.float64)
    out[0] = start
    if nmax >= 1:
        out[1] = 1.0 - 2.0 * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = -2.0 * x * out[n] - 2.0 * n * out[n - 1]
    return out


def dawson_derivatives(nmax: int, x: ArrayLike) -> np.ndarray:
    """daw^(0..nmax)(x) from D' = 1 - 2xD and D^(n+1) = -2x D^(n) - 2n D^(n-1)."""
    x = np.asarray(x, dtype=np.float64)
    return _dawson_recurrence(nmax, x, dawsn(x))


def y_derivatives(pmax: int, x: ArrayLike) -> np.ndarray:
    """Y^(0..pmax)(x) with Y = 2·daw', shape (pmax + 1,) + shape(x)."""
    if pmax < 0:
        raise ValueError(f"derivative order must be >= 0, got {pmax}")
    return 2.0 * dawson_derivatives(pmax + 1, x)[1:]


def y_derivative_errors(pmax: int, x: ArrayLike) -> np.ndarray:
    """Change of ``y_derivatives`` when daw(x) moves by one ulp, same shape.

    Away from 0 the recurrence runs against its dominant, Hermite-like solution: a start
    error δ reaches order p as about |H_p(x)|·δ while Y^(p) itself decays.
    """
    if pmax < 0:
        raise ValueError(f"derivative order must be >= 0, got {pmax}")
    x = np.asarray(x, dtype=np.float64)
    start = dawsn(x)
    with np.errstate(over="ignore", invalid="ignore"):
        base = _dawson_recurrence(pmax + 1, x, start)
        moved = _dawson_recurrence(pmax + 1, x, start + np.spacing(np.abs(start)))
        return 2.0 * np.abs(moved - base)[1:]


def y_derivative(p: int, x: ArrayLike) -> np.ndarray:
    """Y^(p)(x)."""
    return y_derivatives(p, x)[p]


def scaled_hermite_iter(x: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (mantissa, log-scale) of h_n(x)·exp(x²/2) for n = 0, 1, 2, ...

    The value is mantissa·exp(log-scale); the split keeps high orders at large |x| finite.
    """
    prev = np.zeros_like(x)
    cur = np.full_like(x, PI_QUARTER)
    log_scale = np.zeros_like(x)
    n = 0
    while True:
        yield cur, log_scale
        nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        n += 1
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            factor = np.where(big, np.abs(cur), 1.0)
            cur, prev = cur / factor, prev / factor
            log_scale = log_scale + np.log(factor)


def y_derivative_series(p: int, x: ArrayLike) -> np.ndarray:
    """Y^(p)(x) from its Hermite-polynomial series.

    Y^(2q) = (-1)^q 2^q Σ_k (-1)^k (k+q)!/(2^k (2k)!) H_2k and
    Y^(2q+1) = (-1)^(q+1) 2^q Σ_k (-1)^k (k+q+1)!/(2^k (2k+1)!) H_2k+1, summed through
    scaled Hermite functions. Stops once 50 consecutive terms are below 1e-15 of the
    running sum. Accurate for moderate |x|; the recurrence in ``y_derivatives`` is the
    primary path.
    """
    if p < 0:
        raise ValueError(f"derivative order must be >= 0, got {p}")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    q, odd = divmod(p, 2)
    total = np.zeros_like(x)
    small_run = np.zeros(x.shape, dtype=np.int64)
    functions = scaled_hermite_iter(x)
    if odd:
        next(functions)
    for k in range(Y_SERIES_MAX_TERMS):
        cur, log_scale = next(functions)
        if odd:
            log_coeff = gammaln(k + q + 2) - 0.5 * gammaln(2 * k + 2) + 0.5 * math.log(2.0)
        else:
            log_coeff = gammaln(k + q + 1) - 0.5 * gammaln(2 * k + 1)
        term = (-1.0) ** k * PI_QUARTER**-1 * np.exp(log_coeff + log_scale) * cur
        total = total + term
        small = np.abs(term) <= Y_SERIES_REL_TOL * np.abs(total)
        small_run = np.where(small, small_run + 1, 0)
        if np.all(small_run >= Y_SERIES_STOP_RUN):
            break
        # skip the opposite-parity order
        next(functions)
    else:
        raise TruncationError(
            f"Y^({p}) Hermite series did not settle within {Y_SERIES_MAX_TERMS} terms"
        )
    sign = (-1.0) ** (q + odd)
    return np.asarray(sign * 2.0**q * total)


def y_complex(z: Union[complex, np.ndarray]) -> np.ndarray:
    """Y(z) = 2 - 4z·daw(z) continued to complex arguments."""
    z = np.asarray(z, dtype=np.complex128)
    return 2.0 - 4.0 * z * dawsn(z)


def laguerre(n: int, alpha: int, x: Union[complex, np.ndarray]) -> np.ndarray:
    """L^α_n(x) by the three-term recurrence; real x goes through scipy, complex x is summed here.

    Never expanded in monomials: Σ_u (-1)^u/u! C(n+α, n-u) x^u loses all digits for large x > 0.
    """
    if n < 0:
        raise ValueError(f"Laguerre degree must be >= 0, got {n}")
    x = np.asarray(x)
    if not np.iscomplexobj(x):
        return np.asarray(eval_genlaguerre(n, float(alpha), x.astype(np.float64)))
    previous = np.zeros_like(x, dtype=np.complex128)
    current = np.ones_like(x, dtype=np.complex128)
    for j in range(n):
        # (j+1)L_{j+1} = (2j+1+α-x)L_j - (j+α)L_{j-1}
        following = ((2 * j + 1 + alpha - x) * current - (j + alpha) * previous) / (j + 1)
        previous, current = current, following
    return current


def _signed_exp(sign: int, log_value: float) -> float:
    return float(sign * math.exp(log_value))


def y_operator_element(m: int, n: int, j: int) -> float:
    """⟨m|Y^(j)(Q)|n⟩ in closed form.

    Zero when the index gap and j differ in parity. With gap 2u (j = 2p) or 2u+1
    (j = 2p+1) and m the smaller index, p ≥ u uses C(p-u, m), which vanishes for
    m > p-u; p < u uses the upper-negated binomial C(m+u-p-1, m).
    """
    if min(m, n, j) < 0:
        raise ValueError(f"indices must be >= 0, got ({m}, {n}, {j})")
    m, n = min(m, n), max(m, n)
    gap = n - m
    if (gap - j) % 2:
        return 0.0
    p, odd = divmod(j, 2)
    u = (gap - odd) // 2
    if p >= u:
        if m > p - u:
            return 0.0
        log_binom = log_binomial(p - u, m)
        sign = (-1) ** (p + u + m + odd)
    else:
        log_binom = log_binomial(m + u - p - 1, m)
        sign = (-1) ** (p + u + odd)
    log_value = (
        (p + 0.5 * odd) * math.log(2.0)
        + log_factorial(p + u + odd)
        + 0.5 * (log_factorial(m) - log_factorial(n))
        + log_binom
    )
    return _signed_exp(sign, log_value)


def y_matrix_element(m: int, u: int, j: int) -> float:
    """⟨m|Y^(j)(Q)|m+2u⟩ for even j, ⟨m|Y^(j)(Q)|m+2u+1⟩ for odd j."""
    return y_operator_element(m, m + 2 * u + j % 2, j)


def triple_product(m: int, n: int, l: int) -> float:
    """∫ H_m H_n H_l exp(-x²) dx = √(π 2^(m+n+l)) m! n! l! / ((s-m)! (s-n)! (s-l)!).

    s = (m+n+l)/2; zero for odd m+n+l or when s < max(m, n, l).
    """
    if (m + n + l) % 2:
        return 0.0
    s = (m + n + l) // 2
    if min(s - m, s - n, s - l) < 0:
        return 0.0
    log_value = (
        0.5 * (math.log(math.pi) + (m + n + l) * math.log(2.0))
        + log_factorial(m)
        + log_factorial(n)
        + log_factorial(l)
        - log_factorial(s - m)
        - log_factorial(s - n)
        - log_factorial(s - l)
    )
    return math.exp(log_value)


def factorial_ratio_sqrt(n: int, m: int) -> float:
    """√(n!/m!)."""
    return math.exp(0.5 * (log_factorial(n) - log_factorial(m)))
