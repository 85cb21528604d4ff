"""Shifting the λ-parameter by Gaussian convolution and by its Fourier inverse."""

import logging
import math
from typing import Tuple

import numpy as np
from scipy.ndimage import minimum_filter

from phase_space_tomography.constants import (
    DECONVOLUTION_CUTOFF,
    GATE_SHELL_FRACTION,
    INTEGRABILITY_GATE,
    SHIFT_MARGIN_SIGMAS,
)
from phase_space_tomography.exceptions import GridError, IllConditionedError
from phase_space_tomography.models.distribution import CoordinateKind, DistributionGrid
from phase_space_tomography.models.manifest import ShiftRecord
from phase_space_tomography.models.state import LambdaParam

logger = logging.getLogger(__name__)

UNIFORM_TOL = 1e-9


def shift_rate(lam: float, lambda_prime: float) -> float:
    """c = (1-λ′)(1-λ)/(λ′-λ), the inverse variance of g_{λ,λ′}."""
    LambdaParam(real=lam).require_shift_pair(lambda_prime)
    return (1.0 - lambda_prime) * (1.0 - lam) / (lambda_prime - lam)


def gaussian_shift_kernel(
    lam: float, lambda_prime: float, q: np.ndarray, p: np.ndarray
) -> np.ndarray:
    """g_{λ,λ′}(q, p) = (c/2π)·exp(-c(q² + p²)/2); integrates to 1 over the plane."""
    rate = shift_rate(lam, lambda_prime)
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    return rate / (2.0 * math.pi) * np.exp(-0.5 * rate * (q**2 + p**2))


def _spacing(axis: np.ndarray, name: str) -> float:
    steps = np.diff(axis)
    step = float(np.mean(steps))
    if np.max(np.abs(steps - step)) > UNIFORM_TOL * max(1.0, abs(step)):
        raise GridError(f"{name} axis must be uniformly spaced for spectral shifting")
    return step


def _frequencies(grid: DistributionGrid) -> Tuple[np.ndarray, np.ndarray, Tuple[int, int]]:
    """Angular frequency mesh of the grid zero-padded to double size."""
    if grid.coords != CoordinateKind.CARTESIAN:
        raise GridError("lambda shifts operate on cartesian (q, p) grids")
    dq = _spacing(grid.axis1, "q")
    dp = _spacing(grid.axis2, "p")
    shape = (2 * grid.axis1.size, 2 * grid.axis2.size)
    u = 2.0 * math.pi * np.fft.fftfreq(shape[0], d=dq)
    v = 2.0 * math.pi * np.fft.fftfreq(shape[1], d=dp)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    return uu, vv, shape


def _valid_after(grid: DistributionGrid, rate: float) -> Tuple[np.ndarray, float]:
    """Erode the input mask by SHIFT_MARGIN_SIGMAS standard deviations of g."""
    margin = SHIFT_MARGIN_SIGMAS / math.sqrt(rate)
    dq = float(grid.axis1[1] - grid.axis1[0])
    dp = float(grid.axis2[1] - grid.axis2[0])
    size = (2 * math.ceil(margin / dq) + 1, 2 * math.ceil(margin / dp) + 1)
    valid = minimum_filter(grid.valid_mask.astype(np.uint8), size=size, mode="constant", cval=0)
    if not np.any(valid):
        span = min(grid.axis1[-1] - grid.axis1[0], grid.axis2[-1] - grid.axis2[0])
        raise GridError(
            f"grid of span {span:.3g} leaves no interior after a {margin:.3g} margin "
            f"({SHIFT_MARGIN_SIGMAS:g} standard deviations of the shift kernel)"
        )
    return valid.astype(bool), margin


def _shifted(
    grid: DistributionGrid,
    values: np.ndarray,
    valid: np.ndarray,
    lam_to: float,
    record: ShiftRecord,
) -> DistributionGrid:
    metadata = dict(grid.metadata)
    metadata["lambda"] = lam_to
    metadata["shift"] = record.model_dump()
    return DistributionGrid(
        coords=grid.coords,
        axis1=grid.axis1,
        axis2=grid.axis2,
        values=values,
        valid=valid,
        metadata=metadata,
    )


def shift_lambda_forward(
    grid: DistributionGrid, lam: float, lambda_prime: float
) -> DistributionGrid:
    """W^λ′ = W^λ ∗ g_{λ,λ′} by zero-padded spectral multiplication.

    Points within five kernel widths of the edge (or of an already invalid point) are
    marked invalid.
    """
    try:
        rate = shift_rate(lam, lambda_prime)
        uu, vv, shape = _frequencies(grid)
        spectrum = np.fft.fft2(grid.values, s=shape)
        transfer = np.exp(-(uu**2 + vv**2) / (2.0 * rate))
        values = np.fft.ifft2(spectrum * transfer)[: grid.axis1.size, : grid.axis2.size]
        valid, margin = _valid_after(grid, rate)
        record = ShiftRecord(
            lam_from=lam, lam_to=lambda_prime, direction="forward", margin=margin
        )
        logger.info(
            f"Shifted lambda {lam} -> {lambda_prime}; {int(valid.sum())} of {valid.size} "
            f"points valid"
        )
        return _shifted(grid, values, valid, lambda_prime, record)
    except Exception as e:
        logger.error(f"Failed to shift lambda {lam} -> {lambda_prime}: {e}")
        raise


def _integrability_gate(amplified: np.ndarray, radius: np.ndarray, cutoff_radius: float) -> None:
    """Share of |Ŵ^λ′/ĝ| in the outer shell of the kept disc must stay below the gate."""
    mass = np.abs(amplified)
    total = float(np.sum(mass))
    if total == 0.0:
        return
    shell = radius >= (1.0 - GATE_SHELL_FRACTION) * cutoff_radius
    fraction = float(np.sum(mass[shell])) / total
    if fraction >= INTEGRABILITY_GATE:
        worst = np.unravel_index(np.argmax(np.where(shell, mass, 0.0)), mass.shape)
        raise IllConditionedError(
            f"inverse lambda shift is not integrable: {fraction:.3g} of the amplified "
            f"spectrum lies in the outer shell (gate {INTEGRABILITY_GATE:g}); amplification "
            f"explodes near |frequency| = {radius[worst]:.4g}"
        )


def shift_lambda_inverse(
    grid: DistributionGrid, lambda_prime: float, lam: float
) -> DistributionGrid:
    """W^λ from W^λ′ (λ < λ′) by dividing the spectrum by ĝ_{λ,λ′}.

    Frequencies where 1/ĝ exceeds 1e8 are zeroed and counted in the shift record.
    """
    try:
        rate = shift_rate(lam, lambda_prime)
        uu, vv, shape = _frequencies(grid)
        spectrum = np.fft.fft2(grid.values, s=shape)
        exponent = (uu**2 + vv**2) / (2.0 * rate)
        kept = exponent <= math.log(DECONVOLUTION_CUTOFF)
        cutoff_radius = math.sqrt(2.0 * rate * math.log(DECONVOLUTION_CUTOFF))
        amplified = np.where(kept, spectrum * np.exp(np.where(kept, exponent, 0.0)), 0.0)
        _integrability_gate(amplified, np.sqrt(uu**2 + vv**2), cutoff_radius)
        values = np.fft.ifft2(amplified)[: grid.axis1.size, : grid.axis2.size]
        valid, margin = _valid_after(grid, rate)
        zeroed = int(np.sum(~kept))
        record = ShiftRecord(
            lam_from=lambda_prime,
            lam_to=lam,
            direction="inverse",
            cutoff=DECONVOLUTION_CUTOFF,
            zeroed_frequencies=zeroed,
            margin=margin,
        )
        logger.info(
            f"Inverse-shifted lambda {lambda_prime} -> {lam}; zeroed {zeroed} frequencies"
        )
        return _shifted(grid, values, valid, lam, record)
    except Exception as e:
        logger.error(f"Failed to inverse-shift lambda {lambda_prime} -> {lam}: {e}")
        raise
