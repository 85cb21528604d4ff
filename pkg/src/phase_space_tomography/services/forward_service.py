"""Forward models: quadrature densities, λ-distributions and their angular components."""

import logging
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from phase_space_tomography.constants import IMAG_TOL, KERNEL_MONOMIAL_LAMBDA, THETA_POINTS
from phase_space_tomography.exceptions import ConsistencyError, ValidityWindowError
from phase_space_tomography.models.distribution import (
    CoordinateKind,
    DistributionGrid,
    DistributionSpec,
    DistributionTarget,
    GridSpec,
    QuadratureDataset,
)
from phase_space_tomography.models.state import DensityMatrix, LambdaParam
from phase_space_tomography.numerics.quadrature import gauss_laguerre, theta_grid
from phase_space_tomography.numerics.special import (
    binomial,
    factorial_ratio_sqrt,
    hermite_functions,
    hermite_functions_scaled,
    laguerre,
    log_factorial,
)
from phase_space_tomography.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


def _real_part(values: np.ndarray, what: str) -> np.ndarray:
    imag = float(np.max(np.abs(np.imag(values)))) if np.size(values) else 0.0
    if imag >= IMAG_TOL:
        raise ConsistencyError(f"{what} has imaginary part {imag:.3g} >= {IMAG_TOL:g}")
    return np.real(values)


def _check_lambda(lam: complex) -> complex:
    try:
        return LambdaParam.of(lam).value
    except ValueError as e:
        raise ValidityWindowError(str(e))


# =============================================================================
# Quadrature densities
# =============================================================================


def _quad_form(rho: DensityMatrix, functions: np.ndarray, theta: np.ndarray) -> np.ndarray:
    n = np.arange(rho.dim).reshape((-1,) + (1,) * theta.ndim)
    vectors = np.exp(1j * n * theta) * functions
    return np.einsum("m...,mn,n...->...", vectors.conj(), rho.elements, vectors)


def quad_density(rho: DensityMatrix, x: np.ndarray, theta: float) -> np.ndarray:
    """W^qd(x, θ) = Σ ρ_mn exp(i(n-m)θ) h_n(x) h_m(x)."""
    x = np.asarray(x, dtype=np.float64)
    theta_arr = np.broadcast_to(np.asarray(theta, dtype=np.float64), x.shape)
    values = _quad_form(rho, hermite_functions(rho.dim - 1, x), theta_arr)
    return _real_part(values, "quadrature density")


def quad_density_scaled(rho: DensityMatrix, x: np.ndarray, theta: float) -> np.ndarray:
    """W^qd(x, θ)·exp(x²), evaluated without underflow."""
    x = np.asarray(x, dtype=np.float64)
    theta_arr = np.broadcast_to(np.asarray(theta, dtype=np.float64), x.shape)
    values = _quad_form(rho, hermite_functions_scaled(rho.dim - 1, x), theta_arr)
    return np.real(values)


def _component(rho: DensityMatrix, k: int, functions: np.ndarray) -> np.ndarray:
    diag = rho.diagonal(k)
    if diag.size == 0:
        return np.zeros(functions.shape[1:], dtype=np.complex128)
    count = diag.size
    return np.einsum("n,n...,n...->...", diag, functions[:count], functions[k : k + count])


def quad_fourier_component(rho: DensityMatrix, k: int, x: np.ndarray) -> np.ndarray:
    """W^qd_k(x) = Σ_n ρ_{n+k,n} h_n(x) h_{n+k}(x); zero for k ≥ dim."""
    if k < 0:
        raise ValueError(f"angular index must be >= 0, got {k}")
    return _component(rho, k, hermite_functions(rho.dim - 1, x))


def quad_fourier_component_scaled(rho: DensityMatrix, k: int, x: np.ndarray) -> np.ndarray:
    """W^qd_k(x)·exp(x²)."""
    if k < 0:
        raise ValueError(f"angular index must be >= 0, got {k}")
    return _component(rho, k, hermite_functions_scaled(rho.dim - 1, x))


def coherent_quadrature_oracle(alpha: complex, x: np.ndarray, theta: float) -> np.ndarray:
    """π^(-1/2) exp(-(x-ũ)²) with ũ = √2 Re(α exp(-iθ))."""
    shift = math.sqrt(2.0) * (complex(alpha) * np.exp(-1j * theta)).real
    return np.exp(-((np.asarray(x) - shift) ** 2)) / math.sqrt(math.pi)


def equidistant_angles(p: int) -> List[float]:
    """θ_t = 2πt/p, t = 0..p-1."""
    if p < 1:
        raise ValueError(f"angle count must be >= 1, got {p}")
    return [2.0 * math.pi * t / p for t in range(p)]


def quadrature_dataset(rho: DensityMatrix, angles: List[float]) -> QuadratureDataset:
    """Closed-form dataset of the quadrature densities of rho at the given angles."""
    return QuadratureDataset(
        angles=list(angles),
        density=lambda x, theta: quad_density(rho, x, theta),
        scaled_density=lambda x, theta: quad_density_scaled(rho, x, theta),
        metadata={"source": rho.label, "dim": rho.dim},
    )


# =============================================================================
# Lambda distributions
# =============================================================================


def klambda_coefficients(n: int, m: int, lam: complex) -> np.ndarray:
    """Coefficients c_j of r^j in exp((1-λ)r²)·K^λ_nm(r) for m ≥ n.

    Only j = m-n+2u (u = 0..n) are nonzero:
    c = √(n!/m!) (1-λ)^(m-n+1) λ^(n-u)/u! C(m, n-u) (1-λ)^(2u). No negative powers of λ
    appear, so λ = 0 is regular.
    """
    if m < n:
        raise ValueError(f"closed form needs m >= n, got n={n}, m={m}")
    lam = complex(lam)
    offset = m - n
    coeffs = np.zeros(offset + 2 * n + 1, dtype=np.complex128)
    prefactor = factorial_ratio_sqrt(n, m) * (1.0 - lam) ** (offset + 1)
    for u in range(n + 1):
        coeffs[offset + 2 * u] = (
            prefactor
            * lam ** (n - u)
            * binomial(m, n - u)
            * math.exp(-log_factorial(u))
            * (1.0 - lam) ** (2 * u)
        )
    return coeffs


def klambda_kernel_scaled(n: int, m: int, lam: complex, r: np.ndarray) -> np.ndarray:
    """exp((1-λ)r²)·K^λ_nm(r) for any n, m.

    For m ≥ n this is √(n!/m!)(1-λ)^(m-n+1) r^(m-n) λ^n L^(m-n)_n(-(1-λ)²r²/λ), with the
    Laguerre factor from its recurrence. Near λ = 0 the monomial coefficients are used.
    """
    if m < n:
        return np.conj(klambda_kernel_scaled(m, n, np.conj(lam), r))
    lam = complex(lam)
    r = np.asarray(r, dtype=np.float64)
    if abs(lam) < KERNEL_MONOMIAL_LAMBDA:
        return np.polynomial.polynomial.polyval(r, klambda_coefficients(n, m, lam))
    k = m - n
    y = -((1.0 - lam) ** 2) * r**2 / lam
    factor = laguerre(n, k, y.real if lam.imag == 0.0 else y)
    prefactor = factorial_ratio_sqrt(n, m) * (1.0 - lam) ** (k + 1) * lam**n
    return np.asarray(prefactor * r**k * factor, dtype=np.complex128)


def klambda_kernel(n: int, m: int, lam: complex, r: np.ndarray) -> np.ndarray:
    """K^λ_nm(r); m < n uses K^λ_nm = conj(K^(conj λ)_mn)."""
    lam = _check_lambda(lam)
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("radius must be >= 0")
    gaussian = np.exp(-(1.0 - lam) * r**2)
    return np.asarray(gaussian * klambda_kernel_scaled(n, m, lam, r))


def klambda_matrix_scaled(dim: int, lam: complex, r: np.ndarray) -> np.ndarray:
    """exp((1-λ)r²)·K^λ_nm(r) for all n, m < dim; shape (dim, dim) + shape(r)."""
    r = np.asarray(r, dtype=np.float64)
    out = np.empty((dim, dim) + r.shape, dtype=np.complex128)
    for n in range(dim):
        for m in range(n, dim):
            out[n, m] = klambda_kernel_scaled(n, m, lam, r)
            if m > n:
                out[m, n] = klambda_kernel_scaled(m, n, lam, r)
    return out


def _lambda_form(
    rho: DensityMatrix, lam: complex, r: np.ndarray, theta: np.ndarray
) -> np.ndarray:
    n = np.arange(rho.dim).reshape((-1,) + (1,) * r.ndim)
    phases = np.exp(1j * n * theta)
    kernels = klambda_matrix_scaled(rho.dim, lam, r)
    return np.einsum("mn,m...,n...,nm...->...", rho.elements, phases.conj(), phases, kernels)


def lambda_distribution(
    rho: DensityMatrix, lam: complex, r: np.ndarray, theta: np.ndarray
) -> np.ndarray:
    """W^λ(r, θ) = Σ ρ_mn exp(i(n-m)θ) K^λ_nm(r).

    For real λ the imaginary part is asserted below 1e-10 and dropped.
    """
    lam = _check_lambda(lam)
    r, theta = np.broadcast_arrays(
        np.asarray(r, dtype=np.float64), np.asarray(theta, dtype=np.float64)
    )
    values = np.exp(-(1.0 - lam) * r**2) * _lambda_form(rho, lam, r, theta)
    if lam.imag == 0.0:
        return _real_part(values, "lambda distribution").astype(np.complex128)
    return values


def lambda_fourier_component(
    rho: DensityMatrix, lam: complex, k: int, r: np.ndarray
) -> np.ndarray:
    """W^λ_k(r) = Σ_n ρ_{n+k,n} K^λ_{n,n+k}(r); zero for k ≥ dim."""
    lam = _check_lambda(lam)
    r = np.asarray(r, dtype=np.float64)
    return np.exp(-(1.0 - lam) * r**2) * lambda_fourier_component_scaled(rho, lam, k, r)


def lambda_fourier_component_scaled(
    rho: DensityMatrix, lam: complex, k: int, r: np.ndarray
) -> np.ndarray:
    """exp((1-λ)r²)·W^λ_k(r), a polynomial in r."""
    if k < 0:
        raise ValueError(f"angular index must be >= 0, got {k}")
    r = np.asarray(r, dtype=np.float64)
    total = np.zeros(r.shape, dtype=np.complex128)
    for n, value in enumerate(rho.diagonal(k)):
        if value != 0:
            total = total + value * klambda_kernel_scaled(n, n + k, lam, r)
    return total


def lambda_fourier_component_magnitude(
    rho: DensityMatrix, lam: complex, k: int, r: np.ndarray
) -> np.ndarray:
    """Σ_n |ρ_{n+k,n}|·|exp((1-λ)r²)K^λ_{n,n+k}(r)|, the rounding scale of the scaled component."""
    r = np.asarray(r, dtype=np.float64)
    total = np.zeros(r.shape, dtype=np.float64)
    for n, value in enumerate(rho.diagonal(k)):
        if value != 0:
            total = total + abs(value) * np.abs(klambda_kernel_scaled(n, n + k, lam, r))
    return total


def coherent_lambda_oracle(alpha: complex, lam: complex, z: np.ndarray) -> np.ndarray:
    """(1-λ) exp(-(1-λ)|α-z|²) with z = (q + ip)/√2."""
    lam = complex(lam)
    return (1.0 - lam) * np.exp(-(1.0 - lam) * np.abs(complex(alpha) - np.asarray(z)) ** 2)


def vacuum_lambda_oracle(lam: complex, r: np.ndarray) -> np.ndarray:
    """(1-λ) exp(-(1-λ)r²)."""
    return coherent_lambda_oracle(0.0, lam, np.asarray(r))


def lambda_normalization(
    rho: DensityMatrix, lam: float, nodes: int = 64, angles: int = THETA_POINTS
) -> float:
    """(1/π)∫∫ W^λ r dr dθ by Gauss–Laguerre in t = (1-λ)r² times a θ trapezoid."""
    if not -1.0 < lam < 1.0:
        raise ValidityWindowError(f"normalization check needs real lambda in (-1, 1), got {lam}")
    t, weights = gauss_laguerre(nodes)
    thetas, theta_weights = theta_grid(angles)
    r = np.sqrt(t / (1.0 - lam))
    rr, tt = np.meshgrid(r, thetas, indexing="ij")
    scaled = np.real(_lambda_form(rho, lam, rr, tt))
    angular = scaled @ theta_weights
    # r dr = dt / (2(1-λ))
    return float(weights @ angular / (2.0 * math.pi * (1.0 - lam)))


# =============================================================================
# Grid tabulation
# =============================================================================


def _polar_from_cartesian(q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    z = (q + 1j * p) / math.sqrt(2.0)
    return np.abs(z), np.angle(z)


def _lambda_rows(rho: DensityMatrix, lam: complex, grid: GridSpec) -> np.ndarray:
    first, second = grid.mesh()
    if grid.coords == CoordinateKind.CARTESIAN:
        r, theta = _polar_from_cartesian(first, second)
    else:
        r, theta = first, second
    if np.any(r < 0):
        raise ValueError("polar grids need r >= 0")
    rows = parallel_map(
        lambda i: lambda_distribution(rho, lam, r[i], theta[i]), list(range(r.shape[0]))
    )
    return np.vstack(rows)


def sample_grid(
    rho: DensityMatrix,
    spec: DistributionSpec,
    grid: Optional[GridSpec] = None,
    x_grid: Optional[np.ndarray] = None,
) -> Union[DistributionGrid, QuadratureDataset]:
    """Tabulate a distribution of rho.

    Lambda targets give a DistributionGrid on ``grid``; quadrature targets give a sampled
    QuadratureDataset on ``x_grid`` at ``spec.angles`` equidistant angles.
    """
    try:
        if spec.target == DistributionTarget.LAMBDA:
            if spec.lam is None or grid is None:
                raise ValueError("lambda tabulation needs lambda and a grid")
            values = _lambda_rows(rho, spec.lam, grid)
            logger.info(f"Tabulated W^{spec.lam} of '{rho.label}' on {values.shape} grid")
            return DistributionGrid(
                coords=grid.coords,
                axis1=grid.axis1.points(),
                axis2=grid.axis2.points(),
                values=values,
                metadata={"spec": spec.model_dump(mode="json"), "state": rho.label},
            )
        if spec.angles is None or x_grid is None:
            raise ValueError("quadrature tabulation needs an angle count and an x grid")
        angles = equidistant_angles(spec.angles)
        samples = np.vstack(parallel_map(lambda t: quad_density(rho, x_grid, t), angles))
        logger.info(f"Tabulated {len(angles)} quadrature densities of '{rho.label}'")
        return QuadratureDataset(
            angles=angles,
            x_grid=x_grid,
            samples=samples,
            metadata={"spec": spec.model_dump(mode="json"), "state": rho.label},
        )
    except Exception as e:
        logger.error(f"Failed to tabulate {spec.target.value} distribution: {e}")
        raise
