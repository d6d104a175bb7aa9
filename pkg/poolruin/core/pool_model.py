"""Participants, premiums and proportional risk-sharing matrices.

Indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Mapping

import numpy as np
import pandas as pd
from scipy import optimize

from poolruin.config import settings
from poolruin.core.distributions import (
    Exponential,
    Gamma,
    LogNormal,
    ScaledMixture,
    SeverityModel,
    to_atoms,
)
from poolruin.exceptions import AllocationError, NetProfitError, SeverityError

log = logging.getLogger("poolruin")

SharingRule = Literal["MP", "UP"]
ScaleFamilyStatus = Literal["pass", "fail", "not-applicable"]


@dataclass(frozen=True, slots=True)
class Participant:
    lam: float
    severity: SeverityModel
    kappa: float = 0.0

    def __post_init__(self) -> None:
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"Claim frequency must be > 0, got {self.lam}")
        if self.kappa < 0.0:
            raise ValueError(f"Initial reserve must be >= 0, got {self.kappa}")
        if not self.severity.mean() > 0.0:
            raise SeverityError(f"Participant severity must have a positive mean, got {self.severity.mean()}")

    @property
    def mean(self) -> float:
        """Mean claim size b_i."""
        return self.severity.mean()


@dataclass(frozen=True, slots=True)
class PoolSpec:
    participants: tuple[Participant, ...]
    eta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "participants", tuple(self.participants))
        if not self.participants:
            raise ValueError("A pool needs at least one participant")
        if not self.eta > 0.0:
            raise NetProfitError(f"Safety loading must be > 0, got {self.eta}")

    @property
    def n(self) -> int:
        return len(self.participants)

    @property
    def intensities(self) -> np.ndarray:
        return np.array([p.lam for p in self.participants])

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.participants])

    @property
    def total_intensity(self) -> float:
        return math.fsum(p.lam for p in self.participants)

    @property
    def homogeneous_frequencies(self) -> bool:
        first = self.participants[0].lam
        return all(math.isclose(p.lam, first, rel_tol=1e-12) for p in self.participants)

    def premium_rates(self) -> np.ndarray:
        return np.array([premium_rate(p, self.eta) for p in self.participants])


def premium_rate(p: Participant, eta: float) -> float:
    """Expected-value premium (1 + eta) * lambda * b."""
    return (1.0 + eta) * p.lam * p.mean


@dataclass(frozen=True, slots=True)
class AllocationMatrix:
    """Transfer ratios a[i][j]: share of participant j's claim paid by participant i."""

    entries: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(float(v) for v in row) for row in self.entries)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise AllocationError(f"Allocation matrix must be square and non-empty, got {n} rows")
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                if not (0.0 <= value <= 1.0):
                    raise AllocationError(f"Entry ({i}, {j}) = {value} is outside [0, 1]")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_array(cls, array: np.ndarray) -> AllocationMatrix:
        return cls(tuple(tuple(row) for row in np.asarray(array, dtype=float)))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries)

    def __getitem__(self, index: tuple[int, int]) -> float:
        i, j = index
        return self.entries[i][j]

    def column_sums(self) -> np.ndarray:
        return self.array.sum(axis=0)


def identity_matrix(n: int) -> AllocationMatrix:
    return AllocationMatrix.from_array(np.eye(n))


def build_mean_proportional(pool: PoolSpec) -> AllocationMatrix:
    """Every column equals the vector of expected-claim-rate shares."""
    rates = pool.intensities * pool.means
    shares = rates / rates.sum()
    return AllocationMatrix.from_array(np.tile(shares[:, None], (1, pool.n)))


def build_uniform(n: int) -> AllocationMatrix:
    if n < 1:
        raise AllocationError(f"Uniform sharing needs n >= 1, got {n}")
    return AllocationMatrix.from_array(np.full((n, n), 1.0 / n))


def complete_alternative(
    pool: PoolSpec,
    fixed: Mapping[tuple[int, int], float],
    tol: float | None = None,
) -> AllocationMatrix:
    """Fill the free entries from full allocation and fairness.

    The unknowns are the entries not in ``fixed``. The equations are the n column sums and
    the n fairness rows. When the linear system alone leaves freedom, the [0, 1] bounds are
    consulted: the completion is accepted only if they pin every free entry down.

    Raises:
        AllocationError: bad fixed entries, an inconsistent or under-determined system,
            or a completion that leaves [0, 1].
    """
    tol = settings.tolerance if tol is None else tol
    n = pool.n
    for (i, j), value in fixed.items():
        if not (0 <= i < n and 0 <= j < n):
            raise AllocationError(f"Fixed entry ({i}, {j}) is outside a {n}x{n} matrix")
        if not (0.0 <= value <= 1.0):
            raise AllocationError(f"Fixed entry ({i}, {j}) = {value} is outside [0, 1]")

    free = [(i, j) for i in range(n) for j in range(n) if (i, j) not in fixed]
    matrix = np.zeros((n, n))
    for (i, j), value in fixed.items():
        matrix[i, j] = value
    if not free:
        candidate = AllocationMatrix.from_array(matrix)
        _ensure_consistent(pool, candidate, tol)
        return candidate

    rates = pool.intensities * pool.means
    position = {cell: k for k, cell in enumerate(free)}
    system = np.zeros((2 * n, len(free)))
    rhs = np.zeros(2 * n)
    for j in range(n):
        rhs[j] = 1.0 - sum(matrix[i, j] for i in range(n) if (i, j) in fixed)
        for i in range(n):
            if (i, j) in position:
                system[j, position[(i, j)]] = 1.0
    for i in range(n):
        row = n + i
        rhs[row] = rates[i] - sum(rates[j] * matrix[i, j] for j in range(n) if (i, j) in fixed)
        for j in range(n):
            if (i, j) in position:
                system[row, position[(i, j)]] = rates[j]

    solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    residual = float(np.max(np.abs(system @ solution - rhs)))
    if residual > tol * max(1.0, float(np.max(np.abs(rhs)))):
        raise AllocationError(
            f"Fixed entries are inconsistent with full allocation and fairness (residual {residual:.3g})"
        )

    rank = int(np.linalg.matrix_rank(system))
    if rank < len(free):
        solution = _pin_by_bounds(system, rhs, free, tol)

    outside = [(cell, float(v)) for cell, v in zip(free, solution) if v < -tol or v > 1.0 + tol]
    if outside:
        detail = ", ".join(f"a[{i},{j}]={v:.6g}" for (i, j), v in outside)
        raise AllocationError(f"Completion leaves [0, 1]: {detail}")
    for (i, j), value in zip(free, solution):
        matrix[i, j] = min(max(float(value), 0.0), 1.0)
    log.debug("Completed %d free entries of a %dx%d matrix", len(free), n, n)
    return AllocationMatrix.from_array(matrix)


def _pin_by_bounds(system: np.ndarray, rhs: np.ndarray, free: list[tuple[int, int]], tol: float) -> np.ndarray:
    """Return the unique point of {system x = rhs, 0 <= x <= 1}, or raise if there is none."""
    bounds = [(0.0, 1.0)] * len(free)
    lowest = np.empty(len(free))
    highest = np.empty(len(free))
    for k in range(len(free)):
        objective = np.zeros(len(free))
        objective[k] = 1.0
        low = optimize.linprog(objective, A_eq=system, b_eq=rhs, bounds=bounds, method="highs")
        high = optimize.linprog(-objective, A_eq=system, b_eq=rhs, bounds=bounds, method="highs")
        if not (low.success and high.success):
            raise AllocationError("No completion within [0, 1] satisfies full allocation and fairness")
        lowest[k], highest[k] = low.x[k], high.x[k]
    loose = [free[k] for k in range(len(free)) if highest[k] - lowest[k] > max(tol, 1e-9)]
    if loose:
        cells = ", ".join(f"a[{i},{j}]" for i, j in loose)
        raise AllocationError(f"Under-determined completion, free entries not pinned down: {cells}")
    return (lowest + highest) / 2.0


def _ensure_consistent(pool: PoolSpec, matrix: AllocationMatrix, tol: float) -> None:
    report = validate(pool, matrix, tol)
    if not (report.full_allocation_ok and report.fairness_ok):
        raise AllocationError("Fully fixed matrix violates full allocation or fairness")


@dataclass(frozen=True, slots=True)
class CapacityViolation:
    i: int
    j: int
    excess: float


@dataclass(frozen=True, slots=True)
class ScaleFamilyCheck:
    status: ScaleFamilyStatus
    reason: str

    @property
    def ok(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True, slots=True)
class ValidationReport:
    column_residuals: tuple[float, ...]
    fairness_residuals: tuple[float, ...]
    capacity: tuple[CapacityViolation, ...]
    scale_family: ScaleFamilyCheck
    net_profit: tuple[bool, ...]
    tol: float = field(default=1e-9)

    @property
    def full_allocation(self) -> tuple[bool, ...]:
        return tuple(abs(r) <= self.tol for r in self.column_residuals)

    @property
    def fairness(self) -> tuple[bool, ...]:
        return tuple(abs(r) <= self.tol for r in self.fairness_residuals)

    @property
    def full_allocation_ok(self) -> bool:
        return all(self.full_allocation)

    @property
    def fairness_ok(self) -> bool:
        return all(self.fairness)

    @property
    def capacity_ok(self) -> bool:
        return not self.capacity

    @property
    def all_pass(self) -> bool:
        return (
            self.full_allocation_ok
            and self.fairness_ok
            and self.capacity_ok
            and self.scale_family.ok
            and all(self.net_profit)
        )

    def to_frame(self) -> pd.DataFrame:
        """One row per individual check, 1-based participant indices."""
        rows: list[dict[str, object]] = []
        for j, (res, ok) in enumerate(zip(self.column_residuals, self.full_allocation)):
            rows.append({"check": "full_allocation", "i": "", "j": j + 1, "value": res, "passed": ok})
        for i, (res, ok) in enumerate(zip(self.fairness_residuals, self.fairness)):
            rows.append({"check": "fairness", "i": i + 1, "j": "", "value": res, "passed": ok})
        for v in self.capacity:
            rows.append({"check": "capacity", "i": v.i + 1, "j": v.j + 1, "value": v.excess, "passed": False})
        for i, ok in enumerate(self.net_profit):
            rows.append({"check": "net_profit", "i": i + 1, "j": "", "value": float("nan"), "passed": ok})
        rows.append(
            {
                "check": f"scale_family:{self.scale_family.status}",
                "i": "",
                "j": "",
                "value": float("nan"),
                "passed": self.scale_family.ok,
            }
        )
        return pd.DataFrame(rows, columns=["check", "i", "j", "value", "passed"])


def validate(pool: PoolSpec, A: AllocationMatrix, tol: float | None = None) -> ValidationReport:
    """Check full allocation, fairness, capacity, scale family and pooled net profit."""
    tol = settings.tolerance if tol is None else tol
    if A.n != pool.n:
        raise AllocationError(f"Matrix is {A.n}x{A.n} but the pool has {pool.n} participants")
    a = A.array
    lam, b = pool.intensities, pool.means
    rates = lam * b
    column_residuals = a.sum(axis=0) - 1.0
    pooled_rates = a @ rates
    fairness_residuals = rates - pooled_rates

    capacity = []
    excess = a * b[None, :] - b[:, None]
    for i in range(pool.n):
        for j in range(pool.n):
            if excess[i, j] > tol:
                capacity.append(CapacityViolation(i, j, float(excess[i, j])))

    net_profit = tuple(bool((1.0 + pool.eta) * rates[i] > pooled_rates[i]) for i in range(pool.n))
    return ValidationReport(
        column_residuals=tuple(float(r) for r in column_residuals),
        fairness_residuals=tuple(float(r) for r in fairness_residuals),
        capacity=tuple(capacity),
        scale_family=scale_family_check(pool),
        net_profit=net_profit,
        tol=tol,
    )


def capacity_feasibility(pool: PoolSpec, rule: SharingRule) -> tuple[bool, tuple[int, int] | None]:
    """Closed-form capacity condition of the MP or UP rule and its first violating (i, j)."""
    lam, b = pool.intensities, pool.means
    total = float(np.sum(lam * b))
    for i in range(pool.n):
        for j in range(pool.n):
            if rule == "MP":
                violated = lam[i] * b[j] > total * (1.0 + 1e-12)
            elif rule == "UP":
                violated = b[j] > pool.n * b[i] * (1.0 + 1e-12)
            else:
                raise ValueError(f"Unknown sharing rule {rule!r}")
            if violated:
                return False, (i, j)
    return True, None


# --- scale family ---

_SHAPE_TOLERANCE = 1e-12


def _unwrap_scaled(d: SeverityModel) -> SeverityModel:
    """Collapse a one-component mixture ``s * base`` into the base family when it is closed under scaling."""
    if not isinstance(d, ScaledMixture) or len(d.components) != 1:
        return d
    comp = d.components[0]
    if comp.is_zero:
        return d
    base = _unwrap_scaled(comp.base)
    s = comp.scale
    if isinstance(base, Exponential):
        return Exponential(base.rate / s)
    if isinstance(base, Gamma):
        return Gamma(base.shape, base.rate / s)
    if isinstance(base, LogNormal):
        return LogNormal(base.mu + math.log(s), base.sigma2)
    return d


def _family_signature(d: SeverityModel) -> tuple[str, object] | None:
    d = _unwrap_scaled(d)
    if isinstance(d, Exponential):
        return "gamma", 1.0
    if isinstance(d, Gamma):
        return "gamma", d.shape
    if isinstance(d, LogNormal):
        return "lognormal", d.sigma2
    atoms = to_atoms(d)
    if atoms is not None:
        m = atoms.mean()
        return "discrete", tuple((v / m, p) for v, p in atoms.atoms)
    return None


def _same_parameter(x: object, y: object) -> bool:
    if not (isinstance(x, tuple) and isinstance(y, tuple)):
        x_val, y_val = float(x), float(y)  # type: ignore[arg-type]
        return math.isclose(x_val, y_val, rel_tol=_SHAPE_TOLERANCE, abs_tol=_SHAPE_TOLERANCE)
    return len(x) == len(y) and all(
        math.isclose(vx, vy, rel_tol=_SHAPE_TOLERANCE, abs_tol=_SHAPE_TOLERANCE)
        and math.isclose(px, py, rel_tol=_SHAPE_TOLERANCE, abs_tol=_SHAPE_TOLERANCE)
        for (vx, px), (vy, py) in zip(x, y)
    )


def scale_family_check(pool: PoolSpec) -> ScaleFamilyCheck:
    """Structural test that every Y_i / b_i has the same law."""
    signatures = [_family_signature(p.severity) for p in pool.participants]
    if any(sig is None for sig in signatures):
        return ScaleFamilyCheck("not-applicable", "continuous mixture severities have no structural scale-family test")
    families = {sig[0] for sig in signatures if sig is not None}
    if len(families) > 1:
        return ScaleFamilyCheck("fail", f"severities mix families: {', '.join(sorted(families))}")
    family = families.pop()
    reference = signatures[0][1]  # type: ignore[index]
    for i, sig in enumerate(signatures[1:], start=1):
        if not _same_parameter(reference, sig[1]):  # type: ignore[index]
            what = {"gamma": "shape", "lognormal": "sigma2", "discrete": "normalized atoms"}[family]
            return ScaleFamilyCheck("fail", f"participant {i + 1} differs in {what} from participant 1")
    return ScaleFamilyCheck("pass", f"common {family} scale family")
