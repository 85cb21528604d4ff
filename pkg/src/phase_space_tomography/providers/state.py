"""Closed-form providers backed by a density matrix."""

from typing import Optional

import numpy as np

from phase_space_tomography.models.distribution import ProfileFamily, ProfileKind, RadialProfile
from phase_space_tomography.models.state import DensityMatrix
from phase_space_tomography.providers.base import ComponentProvider
from phase_space_tomography.services import forward_service


class StateQuadratureProvider(ComponentProvider):
    """Quadrature components W^qd_k of a known state."""

    def __init__(self, rho: DensityMatrix):
        super().__init__(ProfileFamily.QUADRATURE, None, rho.label)
        self._rho = rho

    @property
    def state(self) -> Optional[DensityMatrix]:
        return self._rho

    @property
    def closed_form(self) -> bool:
        return True

    def component(self, k: int) -> RadialProfile:
        rho = self._rho
        return RadialProfile(
            family=ProfileFamily.QUADRATURE,
            kind=ProfileKind.CLOSED_FORM,
            k=k,
            scale_rate=1.0,
            evaluator=lambda x: forward_service.quad_fourier_component(rho, k, x),
            scaled_evaluator=lambda x: forward_service.quad_fourier_component_scaled(rho, k, x),
            metadata={"state": rho.label},
        )


class StateLambdaProvider(ComponentProvider):
    """λ-distribution components W^λ_k of a known state."""

    def __init__(self, rho: DensityMatrix, lam: float):
        super().__init__(ProfileFamily.LAMBDA, lam, rho.label)
        self._rho = rho

    @property
    def state(self) -> Optional[DensityMatrix]:
        return self._rho

    @property
    def closed_form(self) -> bool:
        return True

    def component(self, k: int) -> RadialProfile:
        rho = self._rho
        lam = float(self.lam)  # type: ignore[arg-type]

        def scaled(r: np.ndarray) -> np.ndarray:
            return forward_service.lambda_fourier_component_scaled(rho, lam, k, r)

        return RadialProfile(
            family=ProfileFamily.LAMBDA,
            kind=ProfileKind.CLOSED_FORM,
            k=k,
            lam=lam,
            scale_rate=1.0 - lam,
            evaluator=lambda r: forward_service.lambda_fourier_component(rho, lam, k, r),
            scaled_evaluator=scaled,
            magnitude_evaluator=lambda r: forward_service.lambda_fourier_component_magnitude(
                rho, lam, k, r
            ),
            metadata={"state": rho.label},
        )
