"""Provider manager as module singleton: manifests in, component providers out."""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from phase_space_tomography.clients import files
from phase_space_tomography.exceptions import SchemaError
from phase_space_tomography.models.distribution import (
    ProfileFamily,
    ProfileKind,
    QuadratureDataset,
    RadialProfile,
)
from phase_space_tomography.models.manifest import FileRole, Manifest, ManifestKind
from phase_space_tomography.models.state import DensityMatrix
from phase_space_tomography.providers.base import ComponentProvider
from phase_space_tomography.providers.dataset import FiniteAngleProvider, SampledProvider
from phase_space_tomography.providers.state import StateLambdaProvider, StateQuadratureProvider
from phase_space_tomography.services import forward_service

logger = logging.getLogger(__name__)

DensityFn = Callable[[np.ndarray, float], np.ndarray]


class ProviderManager:
    """Builds and caches providers keyed by manifest path and access mode."""

    def __init__(self) -> None:
        self._providers: Dict[str, ComponentProvider] = {}

    @staticmethod
    def _key(manifest_path: Path, sampled: bool) -> str:
        return f"{manifest_path.resolve()}::{'sampled' if sampled else 'exact'}"

    @staticmethod
    def _state(manifest: Manifest, sampled: bool) -> Optional[DensityMatrix]:
        if sampled or manifest.state is None:
            return None
        return manifest.state.to_matrix()

    def create_provider(self, manifest_path: Path, sampled: bool = False) -> ComponentProvider:
        """Create and store the provider a manifest describes.

        Args:
            manifest_path: Manifest written by forward
            sampled: Use the CSV samples even when the source state is embedded

        Returns:
            ComponentProvider: closed-form when the state is known, sampled otherwise
        """
        try:
            manifest = files.read_manifest(manifest_path)
            rho = self._state(manifest, sampled)
            provider: ComponentProvider
            if manifest.kind == ManifestKind.QUADRATURE:
                if rho is not None:
                    provider = StateQuadratureProvider(rho)
                else:
                    provider = FiniteAngleProvider(self.dataset(manifest_path, sampled=True))
            elif manifest.kind == ManifestKind.LAMBDA:
                if manifest.spec.lam is None:
                    raise SchemaError(f"{manifest_path} records no lambda")
                if rho is not None:
                    provider = StateLambdaProvider(rho, manifest.spec.lam)
                else:
                    provider = self._sampled_lambda(manifest_path, manifest)
            else:
                raise ValueError(f"Unknown manifest kind: {manifest.kind}")

            self._providers[self._key(manifest_path, sampled)] = provider
            logger.info(f"Created {provider.__class__.__name__} for {manifest_path}")
            return provider

        except Exception as e:
            logger.error(f"Failed to create provider for {manifest_path}: {e}")
            raise

    def get_provider(self, manifest_path: Path, sampled: bool = False) -> ComponentProvider:
        """Cached provider, created on demand."""
        provider = self._providers.get(self._key(manifest_path, sampled))
        if provider:
            return provider
        return self.create_provider(manifest_path, sampled)

    def list_providers(self) -> List[str]:
        return list(self._providers)

    def clear(self) -> None:
        self._providers.clear()

    def _sampled_lambda(self, manifest_path: Path, manifest: Manifest) -> SampledProvider:
        profiles = []
        for entry in manifest.files_with_role(FileRole.PROFILE):
            if entry.k is None:
                raise SchemaError(f"profile file {entry.path} has no angular index")
            r, values = files.read_profile_csv(manifest_path.parent / entry.path)
            profiles.append(
                RadialProfile(
                    family=ProfileFamily.LAMBDA,
                    kind=ProfileKind.SAMPLED,
                    k=entry.k,
                    lam=manifest.spec.lam,
                    scale_rate=1.0 - float(manifest.spec.lam),  # type: ignore[arg-type]
                    grid=r,
                    values=values,
                )
            )
        if not profiles:
            raise SchemaError(f"{manifest_path} lists no radial profiles")
        return SampledProvider(
            ProfileFamily.LAMBDA, profiles, lam=manifest.spec.lam, label=str(manifest_path)
        )

    def dataset(self, manifest_path: Path, sampled: bool = False) -> QuadratureDataset:
        """Quadrature dataset of a manifest: closed-form from the state or the CSV samples."""
        manifest = files.read_manifest(manifest_path)
        if manifest.kind != ManifestKind.QUADRATURE:
            raise SchemaError(f"{manifest_path} is a {manifest.kind.value} manifest")
        rho = self._state(manifest, sampled)
        entries = sorted(manifest.files_with_role(FileRole.DENSITY), key=lambda f: f.angle or 0.0)
        angles = [float(f.angle) for f in entries if f.angle is not None]
        if len(angles) != len(entries) or not entries:
            raise SchemaError(f"{manifest_path} needs density files with angles")
        if rho is not None:
            return forward_service.quadrature_dataset(rho, angles)
        rows: List[Tuple[np.ndarray, np.ndarray]] = [
            files.read_density_csv(manifest_path.parent / f.path) for f in entries
        ]
        x_grid = rows[0][0]
        if any(not np.array_equal(x, x_grid) for x, _ in rows):
            raise SchemaError(f"density files of {manifest_path} use different x grids")
        return QuadratureDataset(
            angles=angles,
            x_grid=x_grid,
            samples=np.vstack([density for _, density in rows]),
            metadata={"source": str(manifest_path)},
        )

    def density_function(self, manifest_path: Path, sampled: bool = False) -> DensityFn:
        """(x, θ) ↦ W^qd(x, θ): exact for a known state, trigonometric interpolant otherwise."""
        manifest = files.read_manifest(manifest_path)
        rho = self._state(manifest, sampled)
        if rho is not None:
            return lambda x, theta: forward_service.quad_density(rho, x, theta)
        return FiniteAngleProvider(self.dataset(manifest_path, sampled=True)).density


# Module-level singleton
provider_manager = ProviderManager()
