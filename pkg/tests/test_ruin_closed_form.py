"""Closed-form ruin probabilities for exponential and mixture-of-exponential claims."""

import math

import numpy as np
import pytest

from poolruin.core.distributions import Exponential, LogNormal, ScaledMixture
from poolruin.core.pool_model import Participant, PoolSpec, build_mean_proportional, complete_alternative
from poolruin.core.pooled_losses import SurplusSpec, pooled_surplus_spec, standalone_surplus_spec
from poolruin.core.ruin import (
    closed_form_curve,
    mixture_expansion,
    ruin_exponential,
    ruin_mixture_exponential,
)
from poolruin.exceptions import MethodMismatchError

ALT_FIXED = {(0, 0): 0.8, (1, 1): 0.4, (2, 2): 0.7, (0, 1): 0.1}

MP_COEFFICIENTS = (0.673116, 0.0345013, 0.00666811)
MP_EXPONENTS = {
    0: (0.340727, 1.52445, 3.62589),
    1: (2.72582, 12.1956, 29.0071),
    2: (0.454303, 2.03261, 4.83452),
}
ALT_EXPANSIONS = {
    0: ((0.677468, 0.0344959, 0.00232169), (0.204746, 3.5185, 19.8303)),
    1: ((0.616412, 0.08, 0.0178741), (2.16487, 10.0, 17.597)),
    2: ((0.686205, 0.0234319, 0.00464897), (0.47543, 2.7275, 3.87399)),
}


@pytest.fixture
def pool() -> PoolSpec:
    return PoolSpec(
        (
            Participant(2.0, Exponential(0.5)),
            Participant(1.0, Exponential(2.0)),
            Participant(3.0, Exponential(1.0)),
        ),
        eta=0.4,
    )


class TestExponential:
    def test_zero_reserve(self) -> None:
        spec = SurplusSpec(1.4, 1.0, Exponential(1.0))
        assert ruin_exponential(spec, 0.0) == pytest.approx(1 / 1.4, abs=1e-12)

    def test_standalone_participant_one(self, pool: PoolSpec) -> None:
        spec = standalone_surplus_spec(pool, 0)
        kappa = np.array([0.0, 1.0, 5.0])
        expected = 0.7142857 * np.exp(-0.1428571 * kappa)
        assert ruin_exponential(spec, kappa) == pytest.approx(expected, rel=1e-6)

    def test_rejects_mixture(self, pool: PoolSpec) -> None:
        spec = pooled_surplus_spec(pool, build_mean_proportional(pool), 0)
        with pytest.raises(MethodMismatchError):
            ruin_exponential(spec, 1.0)

    def test_expansion_reduces_to_exponential(self) -> None:
        spec = SurplusSpec(1.4, 1.0, Exponential(1.0))
        expansion = mixture_expansion(spec)
        assert len(expansion.exponents) == 1
        assert expansion.lundberg_exponent == pytest.approx(1.0 - 1 / 1.4, rel=1e-12)
        assert expansion.coefficients[0] == pytest.approx(1 / 1.4, rel=1e-12)


class TestGoldenExpansions:
    @pytest.mark.parametrize("i", [0, 1, 2])
    def test_mean_proportional(self, pool: PoolSpec, i: int) -> None:
        spec = pooled_surplus_spec(pool, build_mean_proportional(pool), i)
        expansion = mixture_expansion(spec)
        assert expansion.coefficients == pytest.approx(MP_COEFFICIENTS, rel=1e-4)
        assert expansion.exponents == pytest.approx(MP_EXPONENTS[i], rel=1e-4)

    @pytest.mark.parametrize("i", [0, 1, 2])
    def test_alternative(self, pool: PoolSpec, i: int) -> None:
        spec = pooled_surplus_spec(pool, complete_alternative(pool, ALT_FIXED), i)
        expansion = mixture_expansion(spec)
        coefficients, exponents = ALT_EXPANSIONS[i]
        assert expansion.coefficients == pytest.approx(coefficients, rel=1e-4)
        assert expansion.exponents == pytest.approx(exponents, rel=1e-4)


class TestExpansionInvariants:
    def test_coefficients_sum_to_loading_ratio(self, pool: PoolSpec) -> None:
        for i in range(pool.n):
            spec = pooled_surplus_spec(pool, complete_alternative(pool, ALT_FIXED), i)
            assert mixture_expansion(spec).total == pytest.approx(spec.loading_ratio, abs=1e-8)

    def test_roots_interlace_poles(self) -> None:
        law = ScaledMixture.of((0.3, 1.0, Exponential(1.0)), (0.5, 1.0, Exponential(4.0)), (0.2, 1.0, Exponential(9.0)))
        spec = SurplusSpec(1.3 * law.mean(), 1.0, law)
        exponents = mixture_expansion(spec).exponents
        assert 0.0 < exponents[0] < 1.0 < exponents[1] < 4.0 < exponents[2] < 9.0

    def test_repeated_rates_are_merged(self) -> None:
        law = ScaledMixture.of((0.5, 1.0, Exponential(2.0)), (0.5, 1.0, Exponential(2.0)))
        spec = SurplusSpec(1.4 * law.mean(), 1.0, law)
        expansion = mixture_expansion(spec)
        assert len(expansion.exponents) == 1
        single = SurplusSpec(1.4 * 0.5, 1.0, Exponential(2.0))
        assert expansion(0.7) == pytest.approx(ruin_exponential(single, 0.7), rel=1e-12)

    def test_psi_at_zero_is_loading_ratio_for_fair_pooling(self, pool: PoolSpec) -> None:
        for matrix in (build_mean_proportional(pool), complete_alternative(pool, ALT_FIXED)):
            for i in range(pool.n):
                psi, _ = ruin_mixture_exponential(pooled_surplus_spec(pool, matrix, i), 0.0)
                assert psi == pytest.approx(1 / 1.4, abs=1e-9)

    def test_rejects_lognormal(self) -> None:
        spec = SurplusSpec(1.4 * math.exp(0.5), 1.0, LogNormal(0.0, 1.0))
        with pytest.raises(MethodMismatchError):
            mixture_expansion(spec)


class TestClosedFormCurve:
    def test_curve_is_decreasing_and_bounded(self, pool: PoolSpec) -> None:
        spec = pooled_surplus_spec(pool, build_mean_proportional(pool), 0)
        curve = closed_form_curve(spec, np.linspace(0.0, 10.0, 101))
        assert curve.method == "closed"
        assert np.all(np.diff(curve.psi) <= 1e-15)
        assert np.all((curve.psi >= 0.0) & (curve.psi <= 1.0))
        assert curve.tolerance.max() == 0.0

    def test_pooling_helps_every_participant(self, pool: PoolSpec) -> None:
        grid = np.linspace(0.0, 10.0, 101)
        matrix = build_mean_proportional(pool)
        for i in range(pool.n):
            alone = closed_form_curve(standalone_surplus_spec(pool, i), grid).psi
            pooled = closed_form_curve(pooled_surplus_spec(pool, matrix, i), grid).psi
            assert np.all(pooled <= alone + 1e-9)
