"""Providers built from measured or tabulated data."""

import logging
from typing import Dict, List, Optional

import numpy as np

from phase_space_tomography.exceptions import GridError
from phase_space_tomography.models.distribution import (
    ProfileFamily,
    ProfileKind,
    QuadratureDataset,
    RadialProfile,
)
from phase_space_tomography.providers.base import ComponentProvider

logger = logging.getLogger(__name__)


def finite_angle_average(
    dataset: QuadratureDataset, k: int, x: np.ndarray, scaled: bool = False
) -> np.ndarray:
    """(1/p) Σ_t exp(ikθ_t) W^qd(x, θ_t), optionally times exp(x²)."""
    x = np.asarray(x, dtype=np.float64)
    total = np.zeros(x.shape, dtype=np.complex128)
    for index, theta in enumerate(dataset.angles):
        profile = dataset.profile(index)
        values = profile.scaled(x) if scaled else profile(x)
        total = total + np.exp(1j * k * theta) * values
    return total / dataset.p


class FiniteAngleProvider(ComponentProvider):
    """Discrete angular averages W̃_k of a dataset on the angles 2πt/p."""

    def __init__(self, dataset: QuadratureDataset):
        if not dataset.is_equidistant():
            raise GridError(
                f"finite-angle components need the angles 2*pi*t/p (p={dataset.p}), "
                f"got {dataset.angles}"
            )
        super().__init__(ProfileFamily.QUADRATURE, None, str(dataset.metadata.get("source", "")))
        self.dataset = dataset

    @property
    def p(self) -> int:
        return self.dataset.p

    @property
    def closed_form(self) -> bool:
        return self.dataset.is_closed_form

    def component(self, k: int) -> RadialProfile:
        dataset = self.dataset
        return RadialProfile(
            family=ProfileFamily.QUADRATURE,
            kind=ProfileKind.CLOSED_FORM,
            k=k,
            scale_rate=1.0,
            evaluator=lambda x: finite_angle_average(dataset, k, x),
            scaled_evaluator=lambda x: finite_angle_average(dataset, k, x, scaled=True),
            metadata={"angles": dataset.p},
        )

    def density(self, x: np.ndarray, theta: float) -> np.ndarray:
        """Trigonometric interpolant Σ_{|k|≤(p-1)/2} W̃_k(x) exp(-ikθ) through the measured angles.

        Exact for states whose quadrature densities are trigonometric polynomials of
        degree ≤ (p-1)/2 in θ, i.e. dimension ≤ (p+1)/2.
        """
        total = np.real(finite_angle_average(self.dataset, 0, x))
        for k in range(1, (self.p - 1) // 2 + 1):
            total = total + 2.0 * np.real(
                finite_angle_average(self.dataset, k, x) * np.exp(-1j * k * theta)
            )
        return np.asarray(total)

    def describe(self) -> Dict:
        info = super().describe()
        info["angles"] = self.p
        return info


class SampledProvider(ComponentProvider):
    """Components given as sampled profiles; missing indices are identically zero."""

    def __init__(
        self,
        family: ProfileFamily,
        profiles: List[RadialProfile],
        lam: Optional[float] = None,
        label: str = "samples",
    ):
        super().__init__(family, lam, label)
        self._profiles = {profile.k: profile for profile in profiles}
        logger.debug(f"Sampled provider with components {sorted(self._profiles)}")

    @property
    def closed_form(self) -> bool:
        return False

    @property
    def indices(self) -> List[int]:
        return sorted(self._profiles)

    def component(self, k: int) -> RadialProfile:
        profile = self._profiles.get(k)
        if profile is not None:
            return profile
        rate = 1.0 - self.lam if self.lam is not None else 1.0
        return RadialProfile(
            family=self.family,
            kind=ProfileKind.CLOSED_FORM,
            k=k,
            lam=self.lam,
            scale_rate=rate,
            evaluator=lambda points: np.zeros(np.shape(points), dtype=np.complex128),
            scaled_evaluator=lambda points: np.zeros(np.shape(points), dtype=np.complex128),
        )
