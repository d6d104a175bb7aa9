"""Claim-severity laws and the distributional primitives shared by every other module.

All models are immutable. ``cdf`` and ``stop_loss`` accept a scalar or a numpy array and
return the same shape (a Python float for scalar input).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from scipy import optimize, special

from poolruin.config import settings
from poolruin.exceptions import DiscretizationError, SeverityError

log = logging.getLogger("poolruin")

PROBABILITY_TOLERANCE = 1e-12

Rounding = Literal["lower", "upper"]


def _finish(x: Any, values: np.ndarray) -> float | np.ndarray:
    if np.ndim(x) == 0:
        return float(values)
    return values


class SeverityModel:
    """Common behaviour of every severity variant.

    Subclasses implement ``mean``, ``second_moment``, ``_cdf`` (x >= 0),
    ``_stop_loss`` (t >= 0) and ``sample``.
    """

    __slots__ = ()

    kind: str = "abstract"

    def mean(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        m = self.mean()
        return max(self.second_moment() - m * m, 0.0)

    def cdf(self, x: Any) -> float | np.ndarray:
        arr = np.asarray(x, dtype=float)
        values = np.where(arr < 0.0, 0.0, self._cdf(np.maximum(arr, 0.0)))
        return _finish(x, values)

    def stop_loss(self, t: Any) -> float | np.ndarray:
        """E[(X - t)_+]; below 0 the transform is ``mean - t`` since X >= 0."""
        arr = np.asarray(t, dtype=float)
        values = self._stop_loss(np.maximum(arr, 0.0)) + np.maximum(-arr, 0.0)
        return _finish(t, values)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _stop_loss(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class Exponential(SeverityModel):
    rate: float

    kind = "exponential"

    def __post_init__(self) -> None:
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise SeverityError(f"Exponential rate must be > 0, got {self.rate}")

    def mean(self) -> float:
        return 1.0 / self.rate

    def second_moment(self) -> float:
        return 2.0 / self.rate**2

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return -np.expm1(-self.rate * x)

    def _stop_loss(self, t: np.ndarray) -> np.ndarray:
        return np.exp(-self.rate * t) / self.rate

    def sample(self, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
        return rng.exponential(1.0 / self.rate, size)


@dataclass(frozen=True, slots=True)
class LogNormal(SeverityModel):
    """LogNormal with location ``mu`` and shape ``sigma2`` (variance of log X)."""

    mu: float
    sigma2: float

    kind = "lognormal"

    def __post_init__(self) -> None:
        if not (self.sigma2 > 0.0 and math.isfinite(self.sigma2) and math.isfinite(self.mu)):
            raise SeverityError(f"LogNormal needs finite mu and sigma2 > 0, got ({self.mu}, {self.sigma2})")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def mean(self) -> float:
        return math.exp(self.mu + self.sigma2 / 2.0)

    def second_moment(self) -> float:
        return math.exp(2.0 * self.mu + 2.0 * self.sigma2)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            z = (np.log(x) - self.mu) / self.sigma
        return special.ndtr(z)

    def _stop_loss(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            d1 = (self.mu + self.sigma2 - np.log(t)) / self.sigma
            d2 = d1 - self.sigma
            values = self.mean() * special.ndtr(d1) - t * special.ndtr(d2)
        return np.where(t == 0.0, self.mean(), np.maximum(values, 0.0))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
        return rng.lognormal(self.mu, self.sigma, size)


@dataclass(frozen=True, slots=True)
class Gamma(SeverityModel):
    """Gamma in the shape-rate parametrization."""

    shape: float
    rate: float

    kind = "gamma"

    def __post_init__(self) -> None:
        if not (self.shape > 0.0 and self.rate > 0.0 and math.isfinite(self.shape) and math.isfinite(self.rate)):
            raise SeverityError(f"Gamma needs shape > 0 and rate > 0, got ({self.shape}, {self.rate})")

    def mean(self) -> float:
        return self.shape / self.rate

    def second_moment(self) -> float:
        return self.shape * (self.shape + 1.0) / self.rate**2

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return special.gammainc(self.shape, self.rate * x)

    def _stop_loss(self, t: np.ndarray) -> np.ndarray:
        rt = self.rate * t
        values = self.mean() * special.gammaincc(self.shape + 1.0, rt) - t * special.gammaincc(self.shape, rt)
        return np.maximum(values, 0.0)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
        return rng.gamma(self.shape, 1.0 / self.rate, size)


@dataclass(frozen=True, slots=True)
class DiscreteAtoms(SeverityModel):
    """Finite law on non-negative values; duplicates are merged and atoms sorted."""

    atoms: tuple[tuple[float, float], ...]

    kind = "discrete"

    def __post_init__(self) -> None:
        if not self.atoms:
            raise SeverityError("DiscreteAtoms needs at least one atom")
        merged: dict[float, float] = {}
        for value, prob in self.atoms:
            value, prob = float(value), float(prob)
            if value < 0.0 or not math.isfinite(value):
                raise SeverityError(f"Atom value must be finite and >= 0, got {value}")
            if not (0.0 < prob <= 1.0):
                raise SeverityError(f"Atom probability must be in (0, 1], got {prob}")
            merged[value] = merged.get(value, 0.0) + prob
        total = math.fsum(merged.values())
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise SeverityError(f"Atom probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.atoms)

    def second_moment(self) -> float:
        return math.fsum(v * v * p for v, p in self.atoms)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        cumulative = np.concatenate(([0.0], np.cumsum(self.probabilities)))
        idx = np.searchsorted(self.values, x, side="right")
        return np.minimum(cumulative[idx], 1.0)

    def _stop_loss(self, t: np.ndarray) -> np.ndarray:
        excess = np.maximum(self.values - np.atleast_1d(t)[..., None], 0.0)
        return (excess @ self.probabilities).reshape(np.shape(t))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
        cumulative = np.cumsum(self.probabilities)
        u = rng.random(size)
        idx = np.minimum(np.searchsorted(cumulative, u, side="right"), len(self.atoms) - 1)
        return self.values[idx] if size is not None else float(self.values[idx])


ZERO = DiscreteAtoms(((0.0, 1.0),))


@dataclass(frozen=True, slots=True)
class MixtureComponent:
    weight: float
    scale: float
    base: SeverityModel

    @property
    def is_zero(self) -> bool:
        return self.scale == 0.0 or self.base == ZERO


@dataclass(frozen=True, slots=True)
class ScaledMixture(SeverityModel):
    """Law of ``scale_k * base_k`` picked with probability ``weight_k``.

    Zero-scale components are folded into a single atom at 0, listed first.
    """

    components: tuple[MixtureComponent, ...]

    kind = "mixture"

    def __post_init__(self) -> None:
        if not self.components:
            raise SeverityError("ScaledMixture needs at least one component")
        zero_mass = 0.0
        kept: list[MixtureComponent] = []
        for comp in self.components:
            if not (0.0 <= comp.weight <= 1.0):
                raise SeverityError(f"Mixture weight must be in [0, 1], got {comp.weight}")
            if comp.scale < 0.0 or not math.isfinite(comp.scale):
                raise SeverityError(f"Mixture scale must be finite and >= 0, got {comp.scale}")
            if comp.weight == 0.0:
                continue
            if comp.is_zero:
                zero_mass += comp.weight
            else:
                kept.append(comp)
        total = zero_mass + math.fsum(c.weight for c in kept)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise SeverityError(f"Mixture weights sum to {total!r}, expected 1")
        if zero_mass > 0.0:
            kept.insert(0, MixtureComponent(zero_mass, 0.0, ZERO))
        object.__setattr__(self, "components", tuple(kept))

    @classmethod
    def of(cls, *parts: tuple[float, float, SeverityModel]) -> ScaledMixture:
        return cls(tuple(MixtureComponent(float(w), float(s), base) for w, s, base in parts))

    @property
    def zero_mass(self) -> float:
        first = self.components[0]
        return first.weight if first.is_zero else 0.0

    @property
    def positive_components(self) -> tuple[MixtureComponent, ...]:
        return tuple(c for c in self.components if not c.is_zero)

    def mean(self) -> float:
        return math.fsum(c.weight * c.scale * c.base.mean() for c in self.positive_components)

    def second_moment(self) -> float:
        return math.fsum(c.weight * c.scale**2 * c.base.second_moment() for c in self.positive_components)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        total = np.full(np.shape(x), self.zero_mass)
        for comp in self.positive_components:
            total = total + comp.weight * np.asarray(comp.base.cdf(x / comp.scale))
        return np.minimum(total, 1.0)

    def _stop_loss(self, t: np.ndarray) -> np.ndarray:
        total = np.zeros(np.shape(t))
        for comp in self.positive_components:
            total = total + comp.weight * comp.scale * np.asarray(comp.base.stop_loss(t / comp.scale))
        return total

    def sample(self, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
        weights = np.array([c.weight for c in self.components])
        weights = weights / weights.sum()
        if size is None:
            comp = self.components[int(rng.choice(len(self.components), p=weights))]
            return 0.0 if comp.is_zero else comp.scale * float(comp.base.sample(rng))
        picks = rng.choice(len(self.components), size=size, p=weights)
        out = np.zeros(size)
        for k, comp in enumerate(self.components):
            mask = picks == k
            count = int(mask.sum())
            if count and not comp.is_zero:
                out[mask] = comp.scale * comp.base.sample(rng, count)
        return out


@dataclass(frozen=True, slots=True, eq=False)
class DiscretizedDist:
    """Probabilities on the grid {0, h, 2h, ...}."""

    span: float
    atoms: np.ndarray
    rounding: Rounding
    truncation_mass: float = 0.0

    @property
    def grid(self) -> np.ndarray:
        return self.span * np.arange(len(self.atoms))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.atoms)


# --- module-level operations ---


def mean(d: SeverityModel) -> float:
    return d.mean()


def variance(d: SeverityModel) -> float:
    return d.variance()


def cdf(d: SeverityModel, x: Any) -> float | np.ndarray:
    return d.cdf(x)


def stop_loss(d: SeverityModel, t: Any) -> float | np.ndarray:
    return d.stop_loss(t)


def sample(d: SeverityModel, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
    return d.sample(rng, size)


def scaled(d: SeverityModel, factor: float) -> SeverityModel:
    """Law of ``factor * X``."""
    if factor == 1.0:
        return d
    return ScaledMixture.of((1.0, factor, d))


def quantile(d: SeverityModel, p: float) -> float:
    """Smallest x with cdf(x) >= p (up to brentq accuracy for continuous parts)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {p}")
    atoms = to_atoms(d)
    if atoms is not None:
        cumulative = np.cumsum(atoms.probabilities)
        idx = min(int(np.searchsorted(cumulative, p - PROBABILITY_TOLERANCE)), len(atoms.atoms) - 1)
        return float(atoms.values[idx])
    if d.cdf(0.0) >= p:
        return 0.0
    hi = max(d.mean(), 1.0)
    while d.cdf(hi) < p:
        hi *= 2.0
        if hi > 1e300:
            raise SeverityError(f"Cannot bracket the {p} quantile")
    return float(optimize.brentq(lambda x: d.cdf(x) - p, 0.0, hi, xtol=1e-12 * hi))


def to_atoms(d: SeverityModel) -> DiscreteAtoms | None:
    """Flatten ``d`` to a DiscreteAtoms law when every leaf is discrete, else None."""
    if isinstance(d, DiscreteAtoms):
        return d
    if not isinstance(d, ScaledMixture):
        return None
    pairs: list[tuple[float, float]] = []
    for comp in d.components:
        if comp.is_zero:
            pairs.append((0.0, comp.weight))
            continue
        inner = to_atoms(comp.base)
        if inner is None:
            return None
        pairs.extend((comp.scale * v, comp.weight * p) for v, p in inner.atoms)
    total = math.fsum(p for _, p in pairs)
    return DiscreteAtoms(tuple((v, p / total) for v, p in pairs))


def exponential_components(d: SeverityModel) -> tuple[float, tuple[float, ...], tuple[float, ...]] | None:
    """Decompose ``d`` as (zero mass, weights, rates) of an exponential mixture, or None.

    Gamma laws with shape 1 count as exponential.
    """
    if isinstance(d, Exponential):
        return 0.0, (1.0,), (d.rate,)
    if isinstance(d, Gamma) and d.shape == 1.0:
        return 0.0, (1.0,), (d.rate,)
    if d == ZERO:
        return 1.0, (), ()
    if not isinstance(d, ScaledMixture):
        return None
    zero = 0.0
    weights: list[float] = []
    rates: list[float] = []
    for comp in d.components:
        if comp.is_zero:
            zero += comp.weight
            continue
        inner = exponential_components(comp.base)
        if inner is None:
            return None
        z, ws, rs = inner
        zero += comp.weight * z
        weights.extend(comp.weight * w for w in ws)
        rates.extend(r / comp.scale for r in rs)
    return zero, tuple(weights), tuple(rates)


def equilibrium_discretize(
    d: SeverityModel,
    h: float,
    epsilon: float | None = None,
    rounding: Rounding = "upper",
    limit: int | None = None,
    atom_cap: int | None = None,
) -> DiscretizedDist:
    """Discretize the integrated-tail law with density (1 - F(x)) / mean on a grid of span h.

    ``lower`` puts each cell's mass on its left endpoint, ``upper`` on its right one.
    Without ``limit`` the grid grows until the residual tail mass is at most ``epsilon``;
    with ``limit`` exactly that many cells are produced and the remainder is reported as
    ``truncation_mass``.
    """
    epsilon = settings.panjer_epsilon if epsilon is None else epsilon
    atom_cap = settings.atom_cap if atom_cap is None else atom_cap
    if h <= 0.0:
        raise DiscretizationError(f"Span must be > 0, got {h}")
    if not 0.0 < epsilon <= 1e-3:
        raise DiscretizationError(f"Truncation mass must be in (0, 1e-3], got {epsilon}")
    mu = d.mean()
    if not (math.isfinite(mu) and mu > 0.0):
        raise DiscretizationError(f"Equilibrium law needs a finite positive mean, got {mu}")

    if limit is None:
        x_max = mu
        while float(d.stop_loss(x_max)) / mu > epsilon:
            x_max *= 2.0
            if x_max / h > atom_cap:
                raise DiscretizationError(
                    f"Tail mass {epsilon} not reached within {atom_cap} atoms at span {h}"
                )
        cells = int(math.ceil(x_max / h))
    else:
        cells = int(limit)
    if cells > atom_cap:
        raise DiscretizationError(f"{cells} atoms requested, cap is {atom_cap}")

    survival = np.asarray(d.stop_loss(h * np.arange(cells + 1))) / mu
    masses = np.maximum(survival[:-1] - survival[1:], 0.0)
    if rounding == "lower":
        atoms = masses
    elif rounding == "upper":
        atoms = np.concatenate(([0.0], masses))
    else:
        raise DiscretizationError(f"Unknown rounding {rounding!r}")
    log.debug("Equilibrium discretization: %d cells, span=%g, rounding=%s", cells, h, rounding)
    return DiscretizedDist(span=h, atoms=atoms, rounding=rounding, truncation_mass=float(max(survival[-1], 0.0)))
