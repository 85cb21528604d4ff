"""Tests for cached quadrature rules."""

import math

import numpy as np
import pytest

from phase_space_tomography.numerics.quadrature import (
    gauss_hermite,
    gauss_laguerre,
    gauss_legendre,
    theta_grid,
)


def test_scaled_hermite_weights_match_direct_scaling():
    nodes, weights, scaled = gauss_hermite(20)
    np.testing.assert_allclose(scaled, weights * np.exp(nodes**2), rtol=1e-9)


def test_scaled_hermite_weights_finite_for_large_rules():
    nodes, _, scaled = gauss_hermite(300)
    assert np.all(np.isfinite(scaled))
    assert np.all(scaled > 0)
    assert nodes[-1] > 20


def test_hermite_rule_integrates_gaussian_moment():
    nodes, weights, _ = gauss_hermite(30)
    assert np.sum(weights * nodes**4) == pytest.approx(0.75 * math.sqrt(math.pi))


def test_rules_are_read_only_and_cached():
    nodes, _, _ = gauss_hermite(16)
    with pytest.raises(ValueError):
        nodes[0] = 1.0
    assert gauss_hermite(16)[0] is nodes


def test_generalized_laguerre():
    x, w = gauss_laguerre(10, 2.0)
    # ∫ x^3 · x^2 exp(-x) dx = 5!
    assert np.sum(w * x**3) == pytest.approx(120.0)


def test_legendre_mapped_interval():
    x, w = gauss_legendre(16, 0.0, 2.0)
    assert np.sum(w * x**5) == pytest.approx(64.0 / 6.0)


def test_theta_grid_exact_for_trig_polynomials():
    theta, w = theta_grid(8)
    assert np.sum(w * np.cos(theta) ** 2) == pytest.approx(math.pi)
    assert np.sum(w * np.sin(3 * theta)) == pytest.approx(0.0, abs=1e-14)


def test_invalid_counts():
    with pytest.raises(ValueError, match="node count"):
        gauss_hermite(0)
    with pytest.raises(ValueError, match="angle count"):
        theta_grid(0)
