"""Convex-order checks: stop-loss tables, pooled dominance, transfer matrices and the normalized chain."""

import numpy as np
import pytest

from poolruin.core.distributions import DiscreteAtoms, Exponential, Gamma, LogNormal, SeverityModel
from poolruin.core.order_checks import (
    build_transfer_matrix,
    check_pooled_dominance,
    convex_order_dominates,
    normalized_chain_check,
)
from poolruin.core.pool_model import (
    AllocationMatrix,
    Participant,
    PoolSpec,
    build_mean_proportional,
    validate,
)
from poolruin.core.pooled_losses import build_pooled_claim, build_thinned_standalone
from poolruin.core.scenario import build_matrix, load_embedded
from poolruin.exceptions import AllocationError, HeterogeneousFrequencyError

T1 = 450 / 11  # 40.9091
T2 = 1200 / 11  # 109.0909
T3 = 3200 / 11  # 290.9091


def two_point_pool() -> tuple[PoolSpec, AllocationMatrix]:
    pool = PoolSpec(
        (
            Participant(1.0, DiscreteAtoms(((0.0, 0.5), (2.0, 0.5)))),
            Participant(1.0, DiscreteAtoms(((2.0, 1.0),))),
        ),
        eta=0.4,
    )
    return pool, AllocationMatrix(((0.0, 0.5), (1.0, 0.5)))


def three_point_pool() -> tuple[PoolSpec, AllocationMatrix]:
    third = 1 / 3
    pool = PoolSpec(
        (
            Participant(1.0, DiscreteAtoms(((0.0, third), (100.0, third), (200.0, third)))),
            Participant(1.0, DiscreteAtoms(((0.0, third), (150.0, third), (400.0, third)))),
        ),
        eta=0.4,
    )
    return pool, AllocationMatrix(((0.5, 3 / 11), (0.5, 8 / 11)))


def piecewise(t: float, pieces: list[tuple[float, float, float]]) -> float:
    """Evaluate (intercept - slope * t) / 6 on the piece whose right end exceeds t."""
    for right, intercept, slope in pieces:
        if t < right:
            return (intercept - slope * t) / 6.0
    return 0.0


class TestTwoPointExample:
    def test_pooled_and_thinned_laws(self) -> None:
        pool, matrix = two_point_pool()
        z2 = build_pooled_claim(pool, matrix, 1).law
        assert z2.cdf(0.0) == pytest.approx(0.25)
        assert z2.cdf(1.0) == pytest.approx(0.75)
        thinned = build_thinned_standalone(pool, 0)
        assert thinned.cdf(0.0) == pytest.approx(0.75)

    @pytest.mark.parametrize("i", [0, 1])
    def test_pooled_payment_is_dominated(self, i: int) -> None:
        pool, matrix = two_point_pool()
        comparison = check_pooled_dominance(pool, matrix, i)
        assert comparison.exact
        assert comparison.dominated

    def test_stop_loss_values(self) -> None:
        pool, matrix = two_point_pool()
        z2 = build_pooled_claim(pool, matrix, 1).law
        y2 = build_thinned_standalone(pool, 1)
        assert [z2.stop_loss(t) for t in (0.0, 1.0, 2.0)] == pytest.approx([1.0, 0.25, 0.0])
        assert [y2.stop_loss(t) for t in (0.0, 1.0, 2.0)] == pytest.approx([1.0, 0.5, 0.0])

    def test_chain_holds(self) -> None:
        pool, _ = two_point_pool()
        report = normalized_chain_check(pool)
        assert [(link.i, link.j) for link in report.links] == [(0, 1)]
        assert report.holds


class TestThreePointExample:
    Z1 = [(T1, 300.0, 4.0), (50.0, 300.0 - T1, 3.0), (100.0, 300.0 - T1 - 50.0, 2.0), (T2, T2, 1.0)]
    Y1 = [(100.0, 300.0, 2.0), (200.0, 200.0, 1.0)]
    Z2 = [(50.0, 550.0, 4.0), (100.0, 500.0, 3.0), (T2, 400.0, 2.0), (T3, T3, 1.0)]
    Y2 = [(150.0, 550.0, 2.0), (400.0, 400.0, 1.0)]

    def test_pooled_payment_one_atoms(self) -> None:
        pool, matrix = three_point_pool()
        z1 = build_pooled_claim(pool, matrix, 0).law
        assert z1.cdf(0.0) == pytest.approx(1 / 3)
        assert z1.cdf(T1 + 1e-9) == pytest.approx(1 / 2)
        assert z1.mean() == pytest.approx(50.0)

    @pytest.mark.parametrize(
        ("i", "pooled_pieces", "thinned_pieces"),
        [(0, Z1, Y1), (1, Z2, Y2)],
    )
    def test_stop_loss_tables(self, i: int, pooled_pieces, thinned_pieces) -> None:
        pool, matrix = three_point_pool()
        comparison = check_pooled_dominance(pool, matrix, i)
        for t, lhs, rhs in zip(comparison.grid, comparison.lhs, comparison.rhs):
            assert lhs == pytest.approx(piecewise(t, pooled_pieces), abs=1e-9)
            assert rhs == pytest.approx(piecewise(t, thinned_pieces), abs=1e-9)

    def test_breakpoints_are_on_the_exact_grid(self) -> None:
        pool, matrix = three_point_pool()
        grid = check_pooled_dominance(pool, matrix, 0).grid
        for point in (0.0, T1, 50.0, 100.0, T2, 200.0):
            assert np.any(np.isclose(grid, point))

    @pytest.mark.parametrize("i", [0, 1])
    def test_both_pooled_payments_dominated(self, i: int) -> None:
        pool, matrix = three_point_pool()
        assert check_pooled_dominance(pool, matrix, i).dominated

    def test_laws_are_outside_a_scale_family(self) -> None:
        pool, matrix = three_point_pool()
        report = validate(pool, matrix)
        assert report.fairness_ok
        assert report.scale_family.status == "fail"

    def test_normalized_chain_fails(self) -> None:
        pool, _ = three_point_pool()
        report = normalized_chain_check(pool)
        assert not report.holds
        comparison = report.links[0].comparison
        k = int(np.argmin(np.abs(comparison.grid - 2.0)))
        assert comparison.lhs[k] == pytest.approx(0.2 / 3.3, abs=1e-9)
        assert comparison.rhs[k] == pytest.approx(0.0, abs=1e-12)

    def test_transfer_matrix_breaks_dominance(self) -> None:
        pool, _ = three_point_pool()
        transfer = build_transfer_matrix(0, 1, pool.means)
        comparison = check_pooled_dominance(pool, transfer, 0)
        assert not comparison.dominated
        k = int(np.argmin(np.abs(comparison.grid - 200.0)))
        assert comparison.lhs[k] == pytest.approx((2400 / 11 - 200.0) / 6.0, abs=1e-9)
        assert comparison.rhs[k] == pytest.approx(0.0, abs=1e-12)


class TestTransferMatrix:
    def test_entries(self) -> None:
        a = build_transfer_matrix(0, 2, [1.0, 5.0, 4.0]).array
        expected = [[0.0, 0.0, 0.25], [0.0, 1.0, 0.0], [1.0, 0.0, 0.75]]
        assert np.allclose(a, expected)

    def test_transfer_matrix_is_fair(self) -> None:
        pool = PoolSpec(
            (Participant(1.0, Exponential(1.0)), Participant(1.0, Exponential(0.25))),
            eta=0.4,
        )
        report = validate(pool, build_transfer_matrix(0, 1, pool.means))
        assert report.full_allocation_ok
        assert report.fairness_ok

    def test_needs_smaller_mean_first(self) -> None:
        with pytest.raises(AllocationError):
            build_transfer_matrix(1, 0, [1.0, 2.0])

    def test_needs_distinct_participants(self) -> None:
        with pytest.raises(AllocationError):
            build_transfer_matrix(0, 0, [1.0, 2.0])


class TestConvexOrder:
    def test_constant_below_spread(self) -> None:
        assert convex_order_dominates(DiscreteAtoms(((1.0, 1.0),)), DiscreteAtoms(((0.0, 0.5), (2.0, 0.5)))).dominated

    def test_unequal_means_are_not_ordered(self) -> None:
        comparison = convex_order_dominates(DiscreteAtoms(((1.0, 1.0),)), DiscreteAtoms(((3.0, 1.0),)))
        assert not comparison.dominated
        assert comparison.mean_gap == pytest.approx(2.0)

    def test_gamma_with_larger_shape_is_smaller(self) -> None:
        comparison = convex_order_dominates(Gamma(4.0, 4.0), Exponential(1.0))
        assert not comparison.exact
        assert comparison.dominated

    def test_reverse_direction_fails(self) -> None:
        comparison = convex_order_dominates(Exponential(1.0), Gamma(4.0, 4.0))
        assert not comparison.dominated
        assert comparison.first_violation is not None

    def test_frame_columns(self) -> None:
        frame = convex_order_dominates(Exponential(1.0), Exponential(1.0), grid=[0.0, 1.0]).to_frame()
        assert list(frame.columns) == ["t", "lhs", "rhs", "gap"]
        assert np.allclose(frame["gap"], 0.0)

    def test_chain_needs_equal_frequencies(self) -> None:
        pool = PoolSpec((Participant(1.0, Exponential(1.0)), Participant(2.0, Exponential(1.0))), eta=0.4)
        with pytest.raises(HeterogeneousFrequencyError):
            normalized_chain_check(pool)


def random_scale_family_pool(rng: np.random.Generator) -> PoolSpec:
    n = int(rng.integers(2, 5))
    family = rng.choice(["exponential", "gamma", "lognormal"])
    shape = float(rng.choice([0.5, 2.0, 3.0]))
    sigma2 = float(rng.uniform(0.2, 1.5))
    common_lam = float(rng.uniform(0.5, 3.0)) if rng.random() < 0.5 else None

    def severity() -> SeverityModel:
        if family == "exponential":
            return Exponential(float(rng.uniform(0.2, 3.0)))
        if family == "gamma":
            return Gamma(shape, float(rng.uniform(0.2, 3.0)))
        return LogNormal(float(rng.uniform(-1.0, 1.0)), sigma2)

    return PoolSpec(
        tuple(Participant(common_lam or float(rng.uniform(0.5, 3.0)), severity()) for _ in range(n)),
        eta=0.4,
    )


def fair_feasible_generators(pool: PoolSpec) -> list[np.ndarray]:
    """Identity, mean-proportional and rate-transfer matrices that are fair and respect capacity.

    The rate transfer for r_i <= r_j (r = lambda * b) sets a_ij = r_i / r_j, a_jj = 1 - a_ij, a_ji = 1.
    """
    n = pool.n
    rates = pool.intensities * pool.means
    candidates = [np.eye(n), build_mean_proportional(pool).array]
    for i in range(n):
        for j in range(n):
            if i != j and rates[i] <= rates[j]:
                a = np.eye(n)
                a[i, i] = 0.0
                a[i, j] = rates[i] / rates[j]
                a[j, j] = 1.0 - a[i, j]
                a[j, i] = 1.0
                candidates.append(a)
    return [a for a in candidates if validate(pool, AllocationMatrix.from_array(a)).capacity_ok]


def random_fair_feasible_matrix(rng: np.random.Generator, pool: PoolSpec) -> AllocationMatrix:
    """Convex blend of the generators; with equal frequencies also multiplied by a second blend."""
    stacked = np.array(fair_feasible_generators(pool))

    def blend() -> np.ndarray:
        return np.tensordot(rng.dirichlet(np.full(len(stacked), 0.5)), stacked, axes=1)

    a = blend() @ blend() if pool.homogeneous_frequencies else blend()
    return AllocationMatrix.from_array(np.clip(a, 0.0, 1.0))


class TestPoolingTheorem:
    @pytest.mark.slow
    def test_random_scale_family_pools_are_dominated(self) -> None:
        rng = np.random.default_rng(20240101)
        for _ in range(200):
            pool = random_scale_family_pool(rng)
            matrix = random_fair_feasible_matrix(rng, pool)
            report = validate(pool, matrix)
            assert report.all_pass
            for i in range(pool.n):
                assert check_pooled_dominance(pool, matrix, i).dominated

    def test_lognormal_pool_with_common_shape_is_dominated(self) -> None:
        pool = PoolSpec(
            tuple(Participant(1.0, LogNormal(mu, 0.8)) for mu in (-0.5, 0.0, 0.7)),
            eta=0.4,
        )
        matrix = random_fair_feasible_matrix(np.random.default_rng(3), pool)
        assert validate(pool, matrix).all_pass
        for i in range(pool.n):
            comparison = check_pooled_dominance(pool, matrix, i)
            assert not comparison.exact
            assert comparison.dominated

    def test_capacity_breach_loses_dominance(self) -> None:
        scenario = load_embedded("lognormal_alt")
        matrix = build_matrix(scenario)
        assert not validate(scenario.pool, matrix).capacity_ok
        assert not check_pooled_dominance(scenario.pool, matrix, 2).dominated
