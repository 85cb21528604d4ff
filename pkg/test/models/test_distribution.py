"""Tests for distribution and reconstruction models."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from phase_space_tomography.exceptions import GridError, TruncationError
from phase_space_tomography.models.distribution import (
    CoordinateKind,
    DistributionGrid,
    GridSpec,
    ProfileFamily,
    ProfileKind,
    QuadratureDataset,
    RadialProfile,
)
from phase_space_tomography.models.reconstruction import (
    ElementEstimate,
    TaylorCoefficients,
    TaylorSource,
)


def _gaussian_profile(r_max: float = 8.0, count: int = 801) -> RadialProfile:
    r = np.linspace(0.0, r_max, count)
    return RadialProfile(
        family=ProfileFamily.LAMBDA,
        kind=ProfileKind.SAMPLED,
        k=0,
        lam=0.0,
        scale_rate=1.0,
        grid=r,
        values=np.exp(-(r**2)),
    )


class TestGridSpec:
    """Grid parsing and meshing."""

    def test_parse(self):
        grid = GridSpec.parse("-2:2:5,-1:1:3")
        q, p = grid.mesh()
        assert q.shape == (5, 3)
        assert q[0, 0] == -2.0 and p[0, -1] == 1.0

    def test_parse_polar(self):
        grid = GridSpec.parse("0:3:4,0:6:7", CoordinateKind.POLAR)
        assert grid.coords == CoordinateKind.POLAR

    @pytest.mark.parametrize("text", ["1:2:3", "a:b:c,1:2:3", "2:1:5,0:1:5"])
    def test_rejects_malformed(self, text):
        with pytest.raises(ValueError):
            GridSpec.parse(text)


class TestRadialProfile:
    """Sampled and closed-form profiles."""

    def test_sampled_interpolation(self):
        profile = _gaussian_profile()
        points = np.array([0.123, 1.5, 2.25])
        np.testing.assert_allclose(profile(points).real, np.exp(-(points**2)), atol=1e-8)

    def test_scaled_strips_gaussian(self):
        profile = _gaussian_profile()
        np.testing.assert_allclose(profile.scaled(np.array([0.5, 1.0])).real, 1.0, atol=1e-6)

    def test_magnitude(self):
        points = np.array([0.0, 0.5, 1.0])
        sampled = _gaussian_profile()
        np.testing.assert_allclose(sampled.magnitude(points), np.abs(sampled.scaled(points)))
        closed = RadialProfile(
            family=ProfileFamily.LAMBDA,
            kind=ProfileKind.CLOSED_FORM,
            k=0,
            evaluator=lambda r: np.zeros_like(r),
            magnitude_evaluator=lambda r: -3.0 * np.ones_like(r),
        )
        np.testing.assert_allclose(closed.magnitude(points), 3.0)

    def test_decay_detection(self):
        assert _gaussian_profile().decays
        assert not _gaussian_profile(r_max=2.0).decays

    def test_outside_grid_without_decay_raises(self):
        profile = _gaussian_profile(r_max=2.0)
        with pytest.raises(GridError, match="does not decay"):
            profile(np.array([3.0]))

    def test_outside_grid_with_decay_is_zero(self):
        assert _gaussian_profile()(np.array([12.0]))[0] == 0.0

    def test_too_few_samples(self):
        with pytest.raises(ValidationError, match="at least 64"):
            _gaussian_profile(count=10)

    def test_closed_form_needs_evaluator(self):
        with pytest.raises(ValidationError, match="evaluator"):
            RadialProfile(family=ProfileFamily.LAMBDA, kind=ProfileKind.CLOSED_FORM, k=0)


class TestQuadratureDataset:
    """Angle and normalization checks."""

    def _samples(self, angles):
        x = np.linspace(-10, 10, 2001)
        row = np.exp(-(x**2)) / math.sqrt(math.pi)
        return x, np.tile(row, (len(angles), 1))

    def test_sampled_dataset(self):
        angles = [0.0, 2 * math.pi / 3, 4 * math.pi / 3]
        x, samples = self._samples(angles)
        dataset = QuadratureDataset(angles=angles, x_grid=x, samples=samples)
        assert dataset.p == 3
        assert dataset.is_equidistant()
        assert not dataset.is_closed_form

    def test_rejects_unnormalized(self):
        x, samples = self._samples([0.0])
        with pytest.raises(ValidationError, match="integrate to 1"):
            QuadratureDataset(angles=[0.0], x_grid=x, samples=2.0 * samples)

    def test_rejects_duplicate_and_out_of_range_angles(self):
        density = lambda x, theta: x  # noqa: E731
        with pytest.raises(ValidationError, match="distinct"):
            QuadratureDataset(angles=[0.0, 0.0], density=density)
        with pytest.raises(ValidationError, match=r"\[0, 2π\)"):
            QuadratureDataset(angles=[7.0], density=density)

    def test_not_equidistant(self):
        dataset = QuadratureDataset(angles=[0.0, 1.0], density=lambda x, theta: x)
        assert not dataset.is_equidistant()


class TestDistributionGrid:
    """Grid container invariants."""

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError, match="axes imply"):
            DistributionGrid(
                coords=CoordinateKind.CARTESIAN,
                axis1=[0.0, 1.0],
                axis2=[0.0, 1.0, 2.0],
                values=np.zeros((3, 2)),
            )

    def test_valid_mask_defaults_to_all(self):
        grid = DistributionGrid(
            coords=CoordinateKind.CARTESIAN, axis1=[0.0, 1.0], axis2=[0.0, 1.0], values=np.eye(2)
        )
        assert grid.valid_mask.all()
        assert grid.axis_names == ("q", "p")


class TestTaylorCoefficients:
    """Parity rules and table completeness."""

    def test_parity_enforced(self):
        with pytest.raises(ValidationError, match="must vanish"):
            TaylorCoefficients(
                k=1, lam=0.2, coefficients=np.array([0.0, 1.0, 1.0]), source=TaylorSource.ANALYTIC
            )

    def test_complete_table_extends_with_zeros(self):
        table = TaylorCoefficients(
            k=0,
            lam=0.2,
            coefficients=np.array([1.0, 0.0, 2.0]),
            source=TaylorSource.ANALYTIC,
            complete=True,
        )
        assert table.coefficient(10) == 0j
        assert table.derivative(2) == 4.0
        assert table.support_end == 1

    def test_incomplete_table_raises_past_order(self):
        table = TaylorCoefficients(
            k=0, lam=0.2, coefficients=np.array([1.0, 0.0, 2.0]), source=TaylorSource.FITTED
        )
        with pytest.raises(TruncationError, match="beyond fitted order"):
            table.coefficient(4)


def test_flagged_estimate_needs_reason():
    with pytest.raises(ValidationError, match="need a reason"):
        ElementEstimate(n=0, k=0, re=1.0, im=0.0, flagged=True)
