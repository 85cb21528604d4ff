"""Tests for the generalized Markov kernel."""

import math

import numpy as np
import pytest

from phase_space_tomography.exceptions import ConsistencyError, TruncationError
from phase_space_tomography.models.distribution import AxisSpec, CoordinateKind, GridSpec
from phase_space_tomography.models.kernel import KernelSpec
from phase_space_tomography.services import forward_service, kernel_service, state_service

Y = np.linspace(-3.0, 3.0, 61)


class TestKernelForms:
    """Dawson closed form against the Hermite series."""

    @pytest.mark.parametrize("lam", [-0.6, -0.3, 0.2, 0.2 + 0.3j])
    def test_closed_form_matches_series(self, lam):
        closed = kernel_service.kernel_closed_form(lam, Y)
        series = kernel_service.kernel_series(lam, Y, max_terms=2000)
        np.testing.assert_allclose(closed, series, atol=1e-7)

    def test_value_at_origin(self):
        # Y(0) = 2
        lam = 0.25
        expected = 2.0 * (1.0 + lam) / (1.0 - lam)
        assert kernel_service.kernel_closed_form(lam, np.array([0.0]))[0] == pytest.approx(expected)

    def test_series_cap(self):
        with pytest.raises(TruncationError, match="did not settle"):
            kernel_service.kernel_series(-0.3, Y, max_terms=3)

    def test_markov_kernel_shift(self):
        spec = KernelSpec(lam_re=-0.4, q=0.5, p=-1.0)
        theta = 0.7
        x = np.linspace(-2.0, 2.0, 9)
        shifted = kernel_service.markov_kernel(spec, x, theta)
        offset = 0.5 * math.cos(theta) - math.sin(theta)
        np.testing.assert_allclose(shifted, kernel_service.kernel_closed_form(-0.4, x - offset))

    def test_markov_kernel_methods(self):
        spec = KernelSpec(lam_re=0.1, lam_im=0.2)
        auto = kernel_service.markov_kernel(spec, Y, 0.0)
        closed = kernel_service.markov_kernel(spec, Y, 0.0, method="closed")
        np.testing.assert_allclose(auto, closed, atol=1e-7)
        with pytest.raises(ValueError, match="unknown kernel"):
            kernel_service.markov_kernel(spec, Y, 0.0, method="fft")

    def test_spec_rejects_unit_circle(self):
        with pytest.raises(ValueError, match=r"\|lambda\| < 1"):
            KernelSpec(lam_re=-1.0)


@pytest.mark.slow
class TestLambdaFromQuadratures:
    """W^λ assembled from quadrature densities."""

    @pytest.mark.parametrize("lam", [-0.5, 0.3])
    def test_coherent_state(self, lam):
        alpha = 0.5
        rho = state_service.coherent_state(16, alpha)
        grid = GridSpec(
            axis1=AxisSpec(start=-2.0, stop=2.0, count=5),
            axis2=AxisSpec(start=-1.0, stop=1.0, count=3),
        )
        result = kernel_service.lambda_from_quadratures(
            lambda x, t: forward_service.quad_density(rho, x, t), lam, grid
        )
        q, p = grid.mesh()
        expected = forward_service.coherent_lambda_oracle(alpha, lam, (q + 1j * p) / math.sqrt(2))
        np.testing.assert_allclose(result.values, expected, atol=1e-5)
        assert result.metadata["lambda"] == [lam, 0.0]

    def test_polar_grid(self):
        rho = state_service.fock_state(2, 0)
        grid = GridSpec(
            coords=CoordinateKind.POLAR,
            axis1=AxisSpec(start=0.0, stop=2.0, count=3),
            axis2=AxisSpec(start=0.0, stop=math.pi, count=3),
        )
        result = kernel_service.lambda_from_quadratures(
            lambda x, t: forward_service.quad_density(rho, x, t), -0.2, grid
        )
        r, _ = grid.mesh()
        np.testing.assert_allclose(
            result.values, forward_service.vacuum_lambda_oracle(-0.2, r), atol=1e-5
        )


def test_non_decaying_density_is_rejected():
    grid = GridSpec(
        axis1=AxisSpec(start=-1.0, stop=1.0, count=2),
        axis2=AxisSpec(start=-1.0, stop=1.0, count=2),
    )
    with pytest.raises(ConsistencyError, match="do not decay"):
        kernel_service.lambda_from_quadratures(lambda x, t: np.ones_like(x), -0.5, grid)
