"""Infinite-time ruin probabilities of compound-Poisson surplus processes.

Four routes are available:

- ``ruin_exponential``: closed form for exponential claims.
- ``ruin_mixture_exponential``: closed form for finite mixtures of exponentials,
  one exponential term per root of the Lundberg equation.
- ``ruin_pk_panjer``: the Pollaczek-Khinchine compound-geometric tail evaluated with
  the Panjer recursion on a discretized ladder-height law, bracketed by lower and upper bounds.
- ``ruin_monte_carlo``: simulation of the surplus at claim instants.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Mapping, Sequence

import numpy as np
import pandas as pd
from scipy import optimize

from poolruin.config import settings
from poolruin.core.distributions import equilibrium_discretize, exponential_components
from poolruin.core.pool_model import AllocationMatrix, PoolSpec
from poolruin.core.pooled_losses import SurplusSpec, pooled_surplus_spec, standalone_surplus_spec
from poolruin.exceptions import MethodMismatchError, RootFindingError

if TYPE_CHECKING:
    from poolruin.methods.base import RuinMethod

log = logging.getLogger("poolruin")

CURVE_COLUMNS = ["kappa", "psi", "lower", "upper", "method", "participant", "mode"]


@dataclass(frozen=True, slots=True, eq=False)
class RuinCurve:
    """psi over a reserve grid, with optional bounds (Panjer) or a 95% half-width (Monte Carlo)."""

    kappa: np.ndarray
    psi: np.ndarray
    method: str
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    ci_half_width: np.ndarray | None = None
    details: Mapping[str, Any] = field(default_factory=dict)

    @property
    def lower_band(self) -> np.ndarray:
        if self.lower is not None:
            return self.lower
        if self.ci_half_width is not None:
            return np.clip(self.psi - self.ci_half_width, 0.0, 1.0)
        return self.psi

    @property
    def upper_band(self) -> np.ndarray:
        if self.upper is not None:
            return self.upper
        if self.ci_half_width is not None:
            return np.clip(self.psi + self.ci_half_width, 0.0, 1.0)
        return self.psi

    @property
    def tolerance(self) -> np.ndarray:
        """Pointwise uncertainty of ``psi``: bound width, CI half-width or zero."""
        return self.upper_band - self.lower_band

    def to_frame(self, participant: int, mode: str) -> pd.DataFrame:
        """Rows in the CSV wire format; ``participant`` is written as given."""
        return pd.DataFrame(
            {
                "kappa": self.kappa,
                "psi": self.psi,
                "lower": self.lower_band,
                "upper": self.upper_band,
                "method": self.method,
                "participant": participant,
                "mode": mode,
            },
            columns=CURVE_COLUMNS,
        )


@dataclass(frozen=True, slots=True)
class MixtureExpansion:
    """psi(kappa) = sum_k C_k exp(-r_k kappa), exponents ascending."""

    coefficients: tuple[float, ...]
    exponents: tuple[float, ...]

    def __call__(self, kappa: Any) -> float | np.ndarray:
        k = np.asarray(kappa, dtype=float)
        values = np.zeros(np.shape(k))
        for c, r in zip(self.coefficients, self.exponents):
            values = values + c * np.exp(-r * k)
        return float(values) if np.ndim(kappa) == 0 else values

    @property
    def lundberg_exponent(self) -> float:
        return self.exponents[0] if self.exponents else math.inf

    @property
    def total(self) -> float:
        return math.fsum(self.coefficients)


@dataclass(frozen=True, slots=True)
class MonteCarloEstimate:
    estimate: float
    ci_half_width: float
    paths: int
    truncated: int


@dataclass(frozen=True, slots=True, eq=False)
class ParticipantCurves:
    standalone: RuinCurve
    pooled: RuinCurve


# --- closed forms ---


def ruin_exponential(spec: SurplusSpec, kappa: Any) -> float | np.ndarray:
    """(lambda / (alpha c)) * exp(-(alpha - lambda / c) * kappa)."""
    parts = exponential_components(spec.claim_law)
    if parts is None or parts[0] != 0.0 or len(parts[2]) != 1:
        raise MethodMismatchError(f"ruin_exponential needs exponential claims, got {spec.claim_law.kind}")
    alpha = parts[2][0]
    lam, c = spec.claim_intensity, spec.premium_rate
    k = np.asarray(kappa, dtype=float)
    values = lam / (alpha * c) * np.exp(-(alpha - lam / c) * k)
    return float(values) if np.ndim(kappa) == 0 else values


def _merged_rates(weights: Sequence[float], rates: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    merged: dict[float, float] = {}
    for w, r in sorted(zip(weights, rates), key=lambda pair: pair[1]):
        for known in merged:
            if math.isclose(known, r, rel_tol=1e-12):
                merged[known] += w
                break
        else:
            merged[r] = w
    betas = np.array(sorted(merged))
    return np.array([merged[b] for b in betas]), betas


def _bracket_root(fn: Any, left: float, right: float, scale: float) -> tuple[float, float]:
    """Move the endpoints inward from the poles until ``fn`` changes sign."""
    offset = 1e-9 * scale
    for _ in range(60):
        a, b = left + offset, right - offset
        if a < b and fn(a) < 0.0 < fn(b):
            return a, b
        offset /= 10.0
        if offset < 1e-300:
            break
    raise RootFindingError(f"Cannot bracket a Lundberg root in ({left}, {right})")


def mixture_expansion(spec: SurplusSpec) -> MixtureExpansion:
    """Exponential expansion of psi for a claim law that is a finite mixture of exponentials.

    The roots of sum_k p_k / (beta_k - r) = c / lambda interlace the rates:
    r_1 < beta_1 < r_2 < beta_2 < ... < r_m < beta_m.
    """
    parts = exponential_components(spec.claim_law)
    if parts is None:
        raise MethodMismatchError(
            f"Closed form needs exponential or mixture-of-exponential claims, got {spec.claim_law.kind}"
        )
    _, weights, rates = parts
    if not weights:
        return MixtureExpansion((), ())
    p, beta = _merged_rates(weights, rates)
    level = spec.premium_rate / spec.claim_intensity

    def g(r: float) -> float:
        return float(np.sum(p / (beta - r))) - level

    def dg(r: float) -> float:
        return float(np.sum(p / (beta - r) ** 2))

    roots: list[float] = []
    lefts = np.concatenate(([0.0], beta[:-1]))
    for k, (lo, hi) in enumerate(zip(lefts, beta)):
        if k == 0:
            a, b = 0.0, _bracket_root(g, 0.0, hi, hi)[1]
        else:
            a, b = _bracket_root(g, lo, hi, hi)
        root = optimize.brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        for _ in range(2):
            step = g(root) / dg(root)
            if a < root - step < b:
                root -= step
        roots.append(float(root))

    rho = spec.loading_ratio
    ratio = spec.claim_intensity / spec.premium_rate
    coefficients = [(1.0 - rho) / (r * ratio * dg(r)) for r in roots]
    log.debug("Lundberg roots %s, coefficients %s", roots, coefficients)
    return MixtureExpansion(tuple(coefficients), tuple(roots))


def ruin_mixture_exponential(spec: SurplusSpec, kappa: Any) -> tuple[float | np.ndarray, MixtureExpansion]:
    expansion = mixture_expansion(spec)
    return expansion(kappa), expansion


def closed_form_curve(spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
    kappa = np.asarray(kappa_grid, dtype=float)
    expansion = mixture_expansion(spec)
    psi = np.clip(np.asarray(expansion(kappa)), 0.0, 1.0)
    return RuinCurve(
        kappa=kappa,
        psi=psi,
        method="closed",
        details={"coefficients": expansion.coefficients, "exponents": expansion.exponents},
    )


# --- Pollaczek-Khinchine / Panjer ---


def compound_geometric_masses(rho: float, ladder: np.ndarray, count: int) -> np.ndarray:
    """First ``count`` probabilities of a geometric(rho) sum of i.i.d. lattice variables.

    Panjer recursion for the (a, b, 0) class with a = rho, b = 0.
    """
    f = np.zeros(count)
    f[: min(count, len(ladder))] = ladder[:count]
    g = np.zeros(count)
    denominator = 1.0 - rho * f[0]
    g[0] = (1.0 - rho) / denominator
    factor = rho / denominator
    for k in range(1, count):
        # sum_{j=1..k} f_j g_{k-j}
        g[k] = factor * np.dot(f[1 : k + 1], g[k - 1 :: -1])
    return g


def _grid_index(kappa: np.ndarray, h: float, rounding: str) -> np.ndarray:
    ratio = kappa / h
    if rounding == "floor":
        return np.floor(ratio + 1e-9).astype(int)
    return np.ceil(ratio - 1e-9).astype(int)


def ruin_pk_panjer(
    spec: SurplusSpec,
    kappa_grid: Sequence[float],
    h: float | None = None,
    epsilon: float | None = None,
    atom_cap: int | None = None,
) -> RuinCurve:
    """Pollaczek-Khinchine tail with Panjer recursion; psi is the midpoint of the two bounds.

    Upper-rounded ladder heights give the upper bound, lower-rounded ones the lower bound.
    Between grid points the upper bound is read at floor(kappa / h) and the lower at ceil.
    """
    kappa = np.asarray(kappa_grid, dtype=float)
    rho = spec.loading_ratio
    mean = spec.claim_law.mean()
    epsilon = settings.panjer_epsilon if epsilon is None else epsilon
    if rho == 0.0:
        zeros = np.zeros_like(kappa)
        return RuinCurve(kappa, zeros, "panjer", lower=zeros, upper=zeros, details={"h": h, "epsilon": epsilon})
    h = mean / settings.panjer_span_ratio if h is None else h
    cells = int(_grid_index(np.array([kappa.max(initial=0.0)]), h, "ceil")[0]) + 1

    upper_ladder = equilibrium_discretize(spec.claim_law, h, epsilon, "upper", limit=cells, atom_cap=atom_cap)
    lower_ladder = equilibrium_discretize(spec.claim_law, h, epsilon, "lower", limit=cells, atom_cap=atom_cap)
    upper_tail = 1.0 - np.cumsum(compound_geometric_masses(rho, upper_ladder.atoms, cells))
    lower_tail = 1.0 - np.cumsum(compound_geometric_masses(rho, lower_ladder.atoms, cells))

    upper = np.clip(upper_tail[_grid_index(kappa, h, "floor")], 0.0, 1.0)
    lower = np.clip(lower_tail[_grid_index(kappa, h, "ceil")], 0.0, 1.0)
    lower = np.minimum(lower, upper)
    log.debug("Panjer: rho=%.6g h=%g cells=%d max width=%.3g", rho, h, cells, float(np.max(upper - lower)))
    return RuinCurve(
        kappa=kappa,
        psi=(lower + upper) / 2.0,
        method="panjer",
        lower=lower,
        upper=upper,
        details={"h": h, "epsilon": epsilon, "cells": cells},
    )


# --- Monte Carlo ---


def _simulate_chunk(
    spec: SurplusSpec,
    thresholds: np.ndarray,
    paths: int,
    horizon_claims: int,
    ceiling: float,
    seed: np.random.SeedSequence,
) -> tuple[np.ndarray, int]:
    """Ruin counts per threshold for ``paths`` paths started at zero reserve.

    A path starting at reserve k is ruined iff the running minimum of c t - S_t drops below -k,
    so one set of paths serves every reserve on the grid.
    """
    rng = np.random.default_rng(seed)
    deepest = float(thresholds.max(initial=0.0))
    level = np.zeros(paths)
    minimum = np.zeros(paths)
    active = np.arange(paths)
    c, lam = spec.premium_rate, spec.claim_intensity
    for _ in range(horizon_claims):
        if active.size == 0:
            break
        waits = rng.exponential(1.0 / lam, active.size)
        claims = np.asarray(spec.claim_law.sample(rng, active.size))
        updated = level[active] + c * waits - claims
        level[active] = updated
        minimum[active] = np.minimum(minimum[active], updated)
        done = (updated > ceiling) | (minimum[active] < -deepest)
        active = active[~done]
    counts = (minimum[:, None] < -thresholds[None, :]).sum(axis=0)
    return counts, int(active.size)


def monte_carlo_curve(
    spec: SurplusSpec,
    kappa_grid: Sequence[float],
    paths: int | None = None,
    horizon_claims: int | None = None,
    seed: int | None = None,
    chunk_size: int | None = None,
    workers: int | None = None,
    ceiling_factor: float | None = None,
) -> RuinCurve:
    """Monte Carlo ruin curve with 95% normal half-widths.

    Paths are split into chunks, each with its own ``SeedSequence`` child of ``seed``; counts
    are reduced in chunk order, so the result does not depend on ``workers``. A path stops
    once its surplus exceeds the reserve by ``ceiling_factor * mean / loading``; paths still
    running after ``horizon_claims`` claims count as not ruined, which biases psi downward.
    """
    kappa = np.asarray(kappa_grid, dtype=float)
    paths = settings.mc_paths if paths is None else paths
    horizon_claims = settings.mc_horizon_claims if horizon_claims is None else horizon_claims
    seed = settings.mc_seed if seed is None else seed
    chunk_size = settings.mc_chunk_size if chunk_size is None else chunk_size
    workers = settings.mc_workers if workers is None else workers
    ceiling_factor = settings.mc_ceiling_factor if ceiling_factor is None else ceiling_factor
    if paths < 1:
        raise ValueError(f"Monte Carlo needs at least one path, got {paths}")

    mean = spec.claim_law.mean()
    details = {"paths": paths, "horizon_claims": horizon_claims, "seed": seed}
    if mean == 0.0:
        zeros = np.zeros_like(kappa)
        return RuinCurve(kappa, zeros, "mc", ci_half_width=zeros, details={**details, "truncated": 0})

    ceiling = ceiling_factor * mean / spec.relative_loading
    sizes = [min(chunk_size, paths - start) for start in range(0, paths, chunk_size)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    log.debug("Monte Carlo: %d paths in %d chunks, ceiling %.6g", paths, len(sizes), ceiling)

    def run(job: tuple[int, np.random.SeedSequence]) -> tuple[np.ndarray, int]:
        size, child = job
        return _simulate_chunk(spec, kappa, size, horizon_claims, ceiling, child)

    jobs = list(zip(sizes, children))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    counts = np.zeros(kappa.shape, dtype=np.int64)
    truncated = 0
    for chunk_counts, chunk_truncated in results:
        counts += chunk_counts
        truncated += chunk_truncated
    if truncated:
        log.warning(
            "%d of %d Monte Carlo paths hit the %d-claim horizon; psi is biased low", truncated, paths, horizon_claims
        )

    psi = counts / paths
    half_width = 1.96 * np.sqrt(psi * (1.0 - psi) / paths)
    return RuinCurve(kappa, psi, "mc", ci_half_width=half_width, details={**details, "truncated": truncated})


def ruin_monte_carlo(
    spec: SurplusSpec,
    kappa: float,
    paths: int | None = None,
    horizon_claims: int | None = None,
    seed: int | None = None,
    **options: Any,
) -> MonteCarloEstimate:
    curve = monte_carlo_curve(spec, [kappa], paths, horizon_claims, seed, **options)
    return MonteCarloEstimate(
        estimate=float(curve.psi[0]),
        ci_half_width=float(curve.ci_half_width[0]),  # type: ignore[index]
        paths=int(curve.details["paths"]),
        truncated=int(curve.details["truncated"]),
    )


# --- per-participant curves ---


def ruin_curves(
    pool: PoolSpec,
    A: AllocationMatrix,
    method: RuinMethod | None,
    kappa_grid: Sequence[float],
) -> dict[int, ParticipantCurves]:
    """Stand-alone and pooled curves for every participant on the same reserve grid."""
    if method is None:
        from poolruin.methods import auto_method

        method = auto_method()
    curves: dict[int, ParticipantCurves] = {}
    for i in range(pool.n):
        standalone = method.curve(standalone_surplus_spec(pool, i), kappa_grid)
        pooled = method.curve(pooled_surplus_spec(pool, A, i), kappa_grid)
        curves[i] = ParticipantCurves(standalone=standalone, pooled=pooled)
    return curves


def curves_to_frame(curves: Mapping[int, ParticipantCurves]) -> pd.DataFrame:
    """Stack every curve in the CSV wire format with 1-based participant numbers."""
    frames = []
    for i, pair in sorted(curves.items()):
        frames.append(pair.standalone.to_frame(i + 1, "standalone"))
        frames.append(pair.pooled.to_frame(i + 1, "pooled"))
    return pd.concat(frames, ignore_index=True)


def pooling_benefit(pair: ParticipantCurves, atol: float | None = None) -> bool:
    """Pooled psi never exceeds stand-alone psi beyond the combined method uncertainty."""
    atol = settings.tolerance if atol is None else atol
    slack = pair.pooled.tolerance + pair.standalone.tolerance + atol
    return bool(np.all(pair.pooled.psi <= pair.standalone.psi + slack))


def reversal_points(pair: ParticipantCurves, atol: float | None = None) -> np.ndarray:
    """Reserves where pooled psi is certainly above stand-alone psi."""
    atol = settings.tolerance if atol is None else atol
    above = pair.pooled.lower_band > pair.standalone.upper_band + atol
    return pair.pooled.kappa[above]
