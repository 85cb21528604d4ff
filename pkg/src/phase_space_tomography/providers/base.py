"""Base interface for angular-component providers."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from phase_space_tomography.models.distribution import ProfileFamily, RadialProfile
from phase_space_tomography.models.state import DensityMatrix


class ComponentProvider(ABC):
    """Supplies the angular Fourier components k ↦ W_{ρ,k} of one distribution."""

    def __init__(self, family: ProfileFamily, lam: Optional[float] = None, label: str = ""):
        self.family = family
        self.lam = lam
        self.label = label

    @property
    def state(self) -> Optional[DensityMatrix]:
        """Source state when the provider is analytic, else None."""
        return None

    @property
    @abstractmethod
    def closed_form(self) -> bool:
        """True when components are evaluated exactly rather than interpolated."""
        pass

    @abstractmethod
    def component(self, k: int) -> RadialProfile:
        """Profile of the k-th angular component.

        Args:
            k: Angular index, k >= 0

        Returns:
            RadialProfile: zero profile when the component vanishes
        """
        pass

    def describe(self) -> Dict[str, Any]:
        """Metadata recorded in reconstruction diagnostics."""
        return {
            "provider": self.__class__.__name__,
            "family": self.family.value,
            "lambda": self.lam,
            "closed_form": self.closed_form,
            "label": self.label,
        }
