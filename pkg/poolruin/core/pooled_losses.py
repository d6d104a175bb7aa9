"""Per-occurrence claim laws after pooling and the surplus specifications built from them."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from poolruin.core.distributions import ZERO, ScaledMixture, SeverityModel
from poolruin.core.pool_model import AllocationMatrix, PoolSpec, premium_rate
from poolruin.exceptions import AllocationError, NetProfitError


@dataclass(frozen=True, slots=True)
class SurplusSpec:
    """Compound-Poisson surplus: premium rate c, claim intensity, claim law and initial reserve."""

    premium_rate: float
    claim_intensity: float
    claim_law: SeverityModel
    initial_reserve: float = 0.0

    def __post_init__(self) -> None:
        if not self.premium_rate > 0.0:
            raise NetProfitError(f"Premium rate must be > 0, got {self.premium_rate}")
        if not self.claim_intensity > 0.0:
            raise ValueError(f"Claim intensity must be > 0, got {self.claim_intensity}")
        if self.initial_reserve < 0.0:
            raise ValueError(f"Initial reserve must be >= 0, got {self.initial_reserve}")
        expected = self.claim_intensity * self.claim_law.mean()
        if not self.premium_rate > expected:
            raise NetProfitError(
                f"Net profit condition fails: premium rate {self.premium_rate:.6g} <= expected claims {expected:.6g}"
            )

    @property
    def loading_ratio(self) -> float:
        """rho = lambda * mean / c, the ruin probability at zero reserve."""
        return self.claim_intensity * self.claim_law.mean() / self.premium_rate

    @property
    def relative_loading(self) -> float:
        return 1.0 / self.loading_ratio - 1.0 if self.loading_ratio > 0.0 else math.inf

    def with_reserve(self, kappa: float) -> SurplusSpec:
        return dataclasses.replace(self, initial_reserve=kappa)


@dataclass(frozen=True, slots=True)
class PooledClaimDist:
    """Law of Z_i: with probability lambda_j / lambda_total the payment is a_ij * Y_j."""

    participant: int
    weights: tuple[float, ...]
    scales: tuple[float, ...]
    law: SeverityModel

    @property
    def mean(self) -> float:
        return self.law.mean()

    @property
    def variance(self) -> float:
        return self.law.variance()


def _check_index(pool: PoolSpec, i: int) -> None:
    if not 0 <= i < pool.n:
        raise IndexError(f"Participant index {i} out of range for a pool of {pool.n}")


def build_pooled_claim(pool: PoolSpec, A: AllocationMatrix, i: int) -> PooledClaimDist:
    _check_index(pool, i)
    if A.n != pool.n:
        raise AllocationError(f"Matrix is {A.n}x{A.n} but the pool has {pool.n} participants")
    total = pool.total_intensity
    weights = tuple(p.lam / total for p in pool.participants)
    scales = A.entries[i]
    law = ScaledMixture.of(*((w, s, p.severity) for w, s, p in zip(weights, scales, pool.participants)))
    return PooledClaimDist(participant=i, weights=weights, scales=scales, law=law)


def build_thinned_standalone(pool: PoolSpec, i: int) -> SeverityModel:
    """Participant i's claim law on the pool clock: an atom at 0 of mass 1 - lambda_i / lambda_total."""
    _check_index(pool, i)
    participant = pool.participants[i]
    share = participant.lam / pool.total_intensity
    if pool.n == 1:
        return participant.severity
    return ScaledMixture.of((1.0 - share, 0.0, ZERO), (share, 1.0, participant.severity))


def standalone_surplus_spec(pool: PoolSpec, i: int) -> SurplusSpec:
    _check_index(pool, i)
    p = pool.participants[i]
    return SurplusSpec(premium_rate(p, pool.eta), p.lam, p.severity, p.kappa)


def pooled_surplus_spec(pool: PoolSpec, A: AllocationMatrix, i: int) -> SurplusSpec:
    p = pool.participants[i]
    claim = build_pooled_claim(pool, A, i)
    return SurplusSpec(premium_rate(p, pool.eta), pool.total_intensity, claim.law, p.kappa)


def aggregate_claim_law(pool: PoolSpec) -> SeverityModel:
    """Claim-size law F_X of the whole pool."""
    if pool.n == 1:
        return pool.participants[0].severity
    total = pool.total_intensity
    return ScaledMixture.of(*((p.lam / total, 1.0, p.severity) for p in pool.participants))


def aggregate_surplus_spec(pool: PoolSpec) -> SurplusSpec:
    return SurplusSpec(
        premium_rate=math.fsum(premium_rate(p, pool.eta) for p in pool.participants),
        claim_intensity=pool.total_intensity,
        claim_law=aggregate_claim_law(pool),
        initial_reserve=math.fsum(p.kappa for p in pool.participants),
    )
