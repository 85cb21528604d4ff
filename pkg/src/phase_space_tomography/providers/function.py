from typing import Callable, Optional

import numpy as np

from phase_space_tomography.models.distribution import ProfileFamily, ProfileKind, RadialProfile
from phase_space_tomography.providers.base import ComponentProvider

ComponentFn = Callable[[int, np.ndarray], np.ndarray]


class FunctionProvider(ComponentProvider):
    """Components from a plain function (k, points) -> values."""

    def __init__(
        self,
        family: ProfileFamily,
        fn: ComponentFn,
        lam: Optional[float] = None,
        scale_rate: float = 1.0,
        label: str = "function",
    ):
        super().__init__(family, lam, label)
        self._fn = fn
        self._scale_rate = scale_rate

    @property
    def closed_form(self) -> bool:
        return True

    def component(self, k: int) -> RadialProfile:
        fn = self._fn
        return RadialProfile(
            family=self.family,
            kind=ProfileKind.CLOSED_FORM,
            k=k,
            lam=self.lam,
            scale_rate=self._scale_rate,
            evaluator=lambda points: fn(k, points),
        )


def zero_provider(family: ProfileFamily, lam: Optional[float] = None) -> FunctionProvider:
    """Provider whose every component is identically zero."""
    return FunctionProvider(
        family,
        lambda k, points: np.zeros(np.shape(points), dtype=np.complex128),
        lam=lam,
        scale_rate=1.0 - lam if lam is not None else 1.0,
        label="zero",
    )
