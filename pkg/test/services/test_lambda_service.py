"""Tests for λ-distribution reconstruction."""

import math

import numpy as np
import pytest

from phase_space_tomography.constants import MAX_FIT_CONDITION
from phase_space_tomography.exceptions import IllConditionedError, ValidityWindowError
from phase_space_tomography.models.distribution import ProfileFamily, ProfileKind, RadialProfile
from phase_space_tomography.models.reconstruction import (
    DivergenceTrend,
    ReconstructionMethod,
    TaylorCoefficients,
    TaylorSource,
)
from phase_space_tomography.providers.state import StateLambdaProvider
from phase_space_tomography.services import lambda_service, state_service


@pytest.fixture(scope="module")
def rho5():
    return state_service.random_state(5, seed=21)


class TestIntegration:
    """ρ_{n+k,n} = 2∫ W^λ_k K^(1/λ)_{n,n+k} r dr."""

    @pytest.mark.parametrize("lam", [-0.7, -0.5, -0.2])
    def test_round_trip(self, rho5, lam):
        provider = StateLambdaProvider(rho5, lam)
        report = lambda_service.reconstruct_integration_matrix(provider, lam, 5)
        np.testing.assert_allclose(report.matrix.elements, rho5.elements, atol=1e-8)
        assert report.method == ReconstructionMethod.LAMBDA_INT
        assert report.diagnostics["rate"] == pytest.approx(2.0 - lam - 1.0 / lam)
        assert any("Wigner-point" in a for a in report.assumptions)

    def test_vacuum_element(self):
        provider = StateLambdaProvider(state_service.fock_state(1, 0), -0.5)
        value = lambda_service.reconstruct_integration(provider.component(0), -0.5, 0, 0)
        assert value == pytest.approx(1.0, abs=1e-10)

    def test_positive_lambda_diverges(self, rho5):
        provider = StateLambdaProvider(rho5, 0.3)
        with pytest.raises(ValidityWindowError, match=r"diverges .*-1\.63333"):
            lambda_service.reconstruct_integration_matrix(provider, 0.3, 5)

    @pytest.mark.parametrize(
        "lam, message",
        [(0.0, "lambda = 0"), (-1.0, "Wigner point")],
    )
    def test_window_edges(self, lam, message):
        provider = StateLambdaProvider(state_service.fock_state(2, 0), lam)
        with pytest.raises(ValidityWindowError, match=message):
            lambda_service.reconstruct_integration(provider.component(0), lam, 0, 0)

    def test_component_mismatch(self, rho5):
        provider = StateLambdaProvider(rho5, -0.5)
        with pytest.raises(ValueError, match="component 1, not 0"):
            lambda_service.reconstruct_integration(provider.component(1), -0.5, 0, 0)

    def test_profile_lambda_mismatch(self, rho5):
        provider = StateLambdaProvider(rho5, -0.5)
        with pytest.raises(ValueError, match="generated for lambda=-0.5"):
            lambda_service.reconstruct_integration(provider.component(0), -0.4, 0, 0)

    @pytest.mark.parametrize("lam", [-0.7, -0.5, -0.2])
    def test_state_zoo(self, zoo_case, lam, flags_cover_errors, block_error):
        rho, block = zoo_case
        report = lambda_service.reconstruct_integration_matrix(
            StateLambdaProvider(rho, lam), lam, rho.dim
        )
        flags_cover_errors(report, rho)
        if lam == -0.2:
            # K^(1/λ) grows like 5^n here; only the leading rows keep full accuracy
            assert block_error(report, rho, min(block, 6)) <= 1e-6
        else:
            assert block_error(report, rho, block) <= 1e-8

    def test_rounding_estimate_enters_residual(self):
        rho = state_service.coherent_state(12, 0.8, tail_tolerance=1e-11)
        report = lambda_service.reconstruct_integration_matrix(
            StateLambdaProvider(rho, -0.2), -0.2, 12
        )
        corner = next(e for e in report.elements if (e.n, e.k) == (8, 1))
        assert corner.residual is not None and corner.residual > 0.0
        if corner.flagged:
            assert "rounding estimate" in corner.reason

    def test_agrees_with_differentiation(self, rho5):
        lam = -0.3
        provider = StateLambdaProvider(rho5, lam)
        integrated = lambda_service.reconstruct_integration_matrix(provider, lam, 5)
        differentiated = lambda_service.reconstruct_differentiation_matrix(provider, lam, 5)
        np.testing.assert_allclose(
            integrated.matrix.elements, differentiated.matrix.elements, atol=1e-8
        )


class TestDivergenceProbe:
    """Truncated vacuum integrals at growing cutoffs."""

    @pytest.mark.parametrize("lam", [0.1, 0.3])
    def test_positive_lambda_grows(self, lam):
        report = lambda_service.divergence_probe(lam, [3.0, 6.0, 9.0])
        sizes = [abs(v) for v in report.values]
        assert sizes[0] < sizes[1] < sizes[2]
        assert sizes[2] / sizes[1] > 10.0
        assert report.trend == DivergenceTrend.DIVERGENT
        assert report.rate == pytest.approx((1.0 - lam) * (1.0 - 1.0 / lam))

    def test_truncated_integral_closed_form(self):
        # 1 - exp(-c R^2) with c = (1-λ)(1-1/λ)
        report = lambda_service.divergence_probe(0.3, [1.0, 2.0])
        rate = report.rate
        np.testing.assert_allclose(
            report.values, [1.0 - math.exp(-rate), 1.0 - math.exp(-4.0 * rate)], rtol=1e-10
        )

    def test_negative_lambda_converges(self):
        report = lambda_service.divergence_probe(-0.5, [9.0, 3.0, 6.0])
        assert report.cutoffs == [3.0, 6.0, 9.0]
        assert report.values[1] == pytest.approx(1.0, abs=1e-10)
        assert report.trend == DivergenceTrend.CONVERGENT

    def test_invalid_arguments(self):
        with pytest.raises(ValidityWindowError):
            lambda_service.divergence_probe(0.0, [1.0])
        with pytest.raises(ValueError, match="positive"):
            lambda_service.divergence_probe(0.3, [])


class TestTaylor:
    """Taylor tables of exp((1-λ)r²)·W^λ_k."""

    @pytest.mark.parametrize("lam", [-0.6, 0.0, 0.4])
    def test_vacuum(self, lam):
        table = lambda_service.taylor_from_state(state_service.fock_state(1, 0), lam, 0)
        assert table.coefficient(0) == pytest.approx(1.0 - lam)
        assert table.complete
        assert table.coefficient(4) == 0

    def test_fit_matches_state(self, rho5):
        lam = -0.3
        provider = StateLambdaProvider(rho5, lam)
        for k in range(3):
            exact = lambda_service.taylor_from_state(rho5, lam, k)
            fitted = lambda_service.taylor_from_samples(provider.component(k), lam, k, exact.order)
            assert fitted.source == TaylorSource.FITTED
            assert not fitted.complete
            np.testing.assert_allclose(fitted.coefficients, exact.coefficients, atol=1e-7)

    def test_fit_ill_conditioned(self, rho5):
        provider = StateLambdaProvider(rho5, 0.2)
        with pytest.raises(IllConditionedError, match="condition number"):
            lambda_service.taylor_from_samples(provider.component(0), 0.2, 0, 40)

    def test_fit_on_noisy_samples(self, rho5):
        lam = 0.2
        grid = np.linspace(0.0, 8.0, 3201)
        exact = StateLambdaProvider(rho5, lam).component(0)
        rng = np.random.default_rng(7)
        noisy = RadialProfile(
            family=ProfileFamily.LAMBDA,
            kind=ProfileKind.SAMPLED,
            k=0,
            lam=lam,
            scale_rate=1.0 - lam,
            grid=grid,
            values=exact(grid) + 1e-10 * rng.standard_normal(grid.size),
        )
        expected = lambda_service.taylor_from_state(rho5, lam, 0)
        fitted = lambda_service.taylor_from_samples(noisy, lam, 0, expected.order)
        assert fitted.condition_number < MAX_FIT_CONDITION
        assert fitted.coefficient(0) == pytest.approx(expected.coefficient(0), abs=1e-6)
        with pytest.raises(IllConditionedError, match="try order"):
            lambda_service.taylor_from_samples(noisy, lam, 0, 40)

    def test_fit_arguments(self, rho5):
        provider = StateLambdaProvider(rho5, 0.2)
        with pytest.raises(ValueError, match="fit window"):
            lambda_service.taylor_from_samples(provider.component(0), 0.2, 0, 4, r_fit=0.8)
        with pytest.raises(ValueError, match="below the angular index"):
            lambda_service.taylor_from_samples(provider.component(3), 0.2, 3, 1)

    def test_derivative_moment(self):
        table = lambda_service.taylor_from_state(state_service.fock_state(2, 1), 0.2, 0)
        assert lambda_service.derivative_moment(table, 2) == pytest.approx(
            2.0 * table.coefficient(2)
        )


class TestTailBound:
    """Remainder majorants of the differentiation series."""

    def test_decays_below_one_half(self):
        bounds = [lambda_service.tail_bound(0.3, 1, 2, t) for t in range(2, 40)]
        assert bounds[-1] < bounds[0]
        assert bounds[-1] < 1e-8

    def test_edge_values(self):
        assert lambda_service.tail_bound(0.0, 0, 0, 3) == 0.0
        assert math.isinf(lambda_service.tail_bound(1.0, 0, 0, 3))
        with pytest.raises(ValueError, match="below n"):
            lambda_service.tail_bound(0.3, 0, 4, 2)

    def test_choose_truncation_reaches_tolerance(self):
        table = np.zeros(121)
        table[::2] = 1.0
        coeffs = TaylorCoefficients(k=0, lam=0.2, coefficients=table, source=TaylorSource.FITTED)
        truncation, bound = lambda_service.choose_truncation(0.2, 0, 1, coeffs, 1e-8)
        assert bound < 1e-8
        assert lambda_service.element_tail_bound(0.2, 0, 1, truncation - 1) >= 1e-8


class TestDecayCondition:
    """Eventual decay of transformed sequences."""

    def test_geometric_sequence_passes(self):
        assert lambda_service.decay_condition_check(0.5 ** np.arange(60))

    def test_constant_sequence_fails(self):
        assert not lambda_service.decay_condition_check(np.ones(60))

    def test_finite_support_and_empty(self):
        assert lambda_service.decay_condition_check(np.ones(5), finite_support=True)
        assert lambda_service.decay_condition_check([])


class TestDifferentiation:
    """Series in the Taylor coefficients at r = 0."""

    @pytest.mark.parametrize("lam", [-0.3, 0.0, 0.3, 0.45])
    def test_round_trip(self, rho5, lam):
        report = lambda_service.reconstruct_differentiation_matrix(
            StateLambdaProvider(rho5, lam), lam, 5
        )
        np.testing.assert_allclose(report.matrix.elements, rho5.elements, atol=1e-10)
        assert not report.flagged

    def test_thermal_state(self):
        rho = state_service.thermal_klambda_state(15, 0.15)
        report = lambda_service.reconstruct_differentiation_matrix(
            StateLambdaProvider(rho, 0.2), 0.2, 15
        )
        np.testing.assert_allclose(report.matrix.elements, rho.elements, atol=1e-8)

    @pytest.mark.slow
    def test_thermal_near_window_edge(self, flags_cover_errors):
        rho = state_service.thermal_klambda_state(40, 0.4)
        report = lambda_service.reconstruct_differentiation_matrix(
            StateLambdaProvider(rho, 0.45), 0.45, 40, tol=1e-6
        )
        flags_cover_errors(report, rho)
        assert len(report.flagged) < len(report.elements)

    @pytest.mark.parametrize("lam", [-0.3, 0.0, 0.3])
    def test_state_zoo(self, zoo_case, lam, flags_cover_errors, block_error):
        rho, block = zoo_case
        report = lambda_service.reconstruct_differentiation_matrix(
            StateLambdaProvider(rho, lam), lam, rho.dim
        )
        flags_cover_errors(report, rho)
        assert block_error(report, rho, block) <= 1e-8

    def test_wigner_point_needs_override(self, rho5):
        provider = StateLambdaProvider(rho5, -1.0)
        with pytest.raises(ValidityWindowError, match="1/2"):
            lambda_service.reconstruct_differentiation_matrix(provider, -1.0, 5)
        report = lambda_service.reconstruct_differentiation_matrix(
            provider, -1.0, 5, allow_override=True
        )
        np.testing.assert_allclose(report.matrix.elements, rho5.elements, atol=1e-10)
        assert any("1/2" in a for a in report.assumptions)

    def test_override_needs_decay_for_fitted_tables(self):
        coeffs = TaylorCoefficients(
            k=0, lam=0.6, coefficients=np.array([1.0, 0.0, 0.5]), source=TaylorSource.FITTED
        )
        with pytest.raises(ValidityWindowError, match="decays to 0"):
            lambda_service.differentiation_estimate(coeffs, 0.6, 0, 0, allow_override=True)
        estimate = lambda_service.differentiation_estimate(
            coeffs, 0.6, 0, 0, allow_override=True, decay_sequence=0.5 ** np.arange(60)
        )
        assert estimate.truncation == 1
        assert estimate.residual is None

    def test_single_element(self, rho5):
        lam = 0.25
        table = lambda_service.taylor_from_state(rho5, lam, 1)
        value = lambda_service.reconstruct_differentiation(table, lam, 2, 1)
        assert value == pytest.approx(rho5.element(3, 2), abs=1e-10)

    def test_table_component_mismatch(self, rho5):
        table = lambda_service.taylor_from_state(rho5, 0.1, 1)
        with pytest.raises(ValueError, match="component 1, not 0"):
            lambda_service.differentiation_estimate(table, 0.1, 0, 0)


class TestQFunction:
    """λ = 0 single-term reconstruction."""

    def test_round_trip(self, rho5):
        report = lambda_service.reconstruct_q_function(StateLambdaProvider(rho5, 0.0), 5)
        assert report.method == ReconstructionMethod.Q_FUNCTION
        np.testing.assert_allclose(report.matrix.elements, rho5.elements, atol=1e-12)

    def test_single_term(self):
        rho = state_service.fock_state(3, 2)
        table = lambda_service.taylor_from_state(rho, 0.0, 0)
        assert lambda_service.q_function_element(table, 2, 0) == pytest.approx(1.0)

    def test_single_term_matches_general_series(self, rho5):
        for k in range(5):
            table = lambda_service.taylor_from_state(rho5, 0.0, k)
            for n in range(5 - k):
                single = lambda_service.q_function_element(table, n, k)
                series = lambda_service._differentiation_sum(table, 0.0, n, k, n + 6)
                assert single == pytest.approx(series, rel=1e-13, abs=1e-15)

    def test_rejects_other_lambda(self, rho5):
        with pytest.raises(ValidityWindowError, match="lambda = 0"):
            lambda_service.reconstruct_q_function(StateLambdaProvider(rho5, 0.3), 5)
