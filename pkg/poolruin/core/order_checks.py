"""Convex-order checks through stop-loss transforms.

X is below Y in convex order when both have the same mean and
E[(X - t)_+] <= E[(Y - t)_+] for every threshold t.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from poolruin.config import settings
from poolruin.core.distributions import SeverityModel, quantile, scaled, to_atoms
from poolruin.core.pool_model import AllocationMatrix, PoolSpec
from poolruin.core.pooled_losses import build_pooled_claim, build_thinned_standalone
from poolruin.exceptions import AllocationError, HeterogeneousFrequencyError

log = logging.getLogger("poolruin")

TAIL_LEVEL = 1.0 - 1e-6
REFINE_POINTS = 201


@dataclass(frozen=True, slots=True, eq=False)
class StopLossComparison:
    """Stop-loss transforms of a candidate (lhs) and a reference (rhs) on a common grid."""

    grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    mean_gap: float
    dominated: bool
    first_violation: tuple[float, float] | None
    tol: float
    exact: bool

    @property
    def gap(self) -> np.ndarray:
        return self.lhs - self.rhs

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.grid, "lhs": self.lhs, "rhs": self.rhs, "gap": self.gap})


def _kink_grid(*laws: SeverityModel) -> np.ndarray | None:
    points = [0.0]
    for law in laws:
        atoms = to_atoms(law)
        if atoms is None:
            return None
        points.extend(v for v, _ in atoms.atoms)
    return np.unique(np.array(points))


def _continuous_grid(X: SeverityModel, Y: SeverityModel, points: int) -> np.ndarray:
    top = max(quantile(X, TAIL_LEVEL), quantile(Y, TAIL_LEVEL))
    return np.linspace(0.0, top, points)


def _refine(grid: np.ndarray, X: SeverityModel, Y: SeverityModel) -> np.ndarray:
    """Add a dense patch around the largest gap."""
    gap = np.asarray(X.stop_loss(grid)) - np.asarray(Y.stop_loss(grid))
    k = int(np.argmax(gap))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    return np.unique(np.concatenate((grid, np.linspace(lo, hi, REFINE_POINTS))))


def convex_order_dominates(
    X: SeverityModel,
    Y: SeverityModel,
    grid: Sequence[float] | None = None,
    tol: float | None = None,
) -> StopLossComparison:
    """Compare the stop-loss transforms of X (lhs) and Y (rhs).

    When both laws are finite and discrete the transforms are piecewise linear with kinks at
    atoms, so checking 0 and every atom is exact. Otherwise the closed-form transforms are
    compared on ``grid`` (default: [0, q] with q the 1 - 1e-6 quantile of the two laws,
    refined around the largest gap).
    """
    kinks = _kink_grid(X, Y) if grid is None else None
    exact = kinks is not None
    if exact:
        points = kinks
        tol = settings.tolerance if tol is None else tol
    else:
        tol = settings.order_tolerance if tol is None else tol
        if grid is None:
            points = _refine(_continuous_grid(X, Y, settings.order_grid_points), X, Y)
        else:
            points = np.asarray(grid, dtype=float)

    lhs = np.asarray(X.stop_loss(points), dtype=float)
    rhs = np.asarray(Y.stop_loss(points), dtype=float)
    mean_gap = abs(X.mean() - Y.mean())
    violations = np.flatnonzero(lhs > rhs + tol)
    first = (float(points[violations[0]]), float(lhs[violations[0]] - rhs[violations[0]])) if violations.size else None
    dominated = mean_gap <= tol and first is None
    log.debug("Stop-loss comparison on %d points: dominated=%s", len(points), dominated)
    return StopLossComparison(
        grid=points,
        lhs=lhs,
        rhs=rhs,
        mean_gap=float(mean_gap),
        dominated=bool(dominated),
        first_violation=first,
        tol=tol,
        exact=exact,
    )


def check_pooled_dominance(
    pool: PoolSpec,
    A: AllocationMatrix,
    i: int,
    grid: Sequence[float] | None = None,
    tol: float | None = None,
) -> StopLossComparison:
    """Is the pooled payment Z_i below the thinned stand-alone claim in convex order?"""
    pooled = build_pooled_claim(pool, A, i).law
    thinned = build_thinned_standalone(pool, i)
    return convex_order_dominates(pooled, thinned, grid, tol)


def build_transfer_matrix(i: int, j: int, b: Sequence[float]) -> AllocationMatrix:
    """Matrix moving a share b_i / b_j of j's claims to i, everything else retained.

    a_ij = b_i / b_j, a_jj = 1 - b_i / b_j, a_ji = 1 and a_ll = 1 for bystanders.
    """
    n = len(b)
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise AllocationError(f"Need two distinct participants in range, got ({i}, {j})")
    if b[i] > b[j]:
        raise AllocationError(f"Transfer needs b_i <= b_j, got b_{i}={b[i]} > b_{j}={b[j]}")
    alpha = b[i] / b[j]
    a = np.eye(n)
    a[i, i] = 0.0
    a[i, j] = alpha
    a[j, j] = 1.0 - alpha
    a[j, i] = 1.0
    return AllocationMatrix.from_array(a)


@dataclass(frozen=True, slots=True, eq=False)
class ChainLink:
    """Comparison of Y_j / b_j (lhs) against Y_i / b_i (rhs) for b_i <= b_j."""

    i: int
    j: int
    comparison: StopLossComparison


@dataclass(frozen=True, slots=True, eq=False)
class ChainReport:
    links: tuple[ChainLink, ...]

    @property
    def holds(self) -> bool:
        return all(link.comparison.dominated for link in self.links)


def normalized_chain_check(
    pool: PoolSpec,
    grid: Sequence[float] | None = None,
    tol: float | None = None,
) -> ChainReport:
    """For every ordered pair with b_i <= b_j, check Y_j / b_j below Y_i / b_i in convex order.

    Raises:
        HeterogeneousFrequencyError: if the claim frequencies differ.
    """
    if not pool.homogeneous_frequencies:
        raise HeterogeneousFrequencyError("Normalized chain check needs equal claim frequencies")
    b = pool.means
    normalized = [scaled(p.severity, 1.0 / p.mean) for p in pool.participants]
    links = []
    for i in range(pool.n):
        for j in range(pool.n):
            if i != j and b[i] <= b[j]:
                comparison = convex_order_dominates(normalized[j], normalized[i], grid, tol)
                links.append(ChainLink(i, j, comparison))
    return ChainReport(tuple(links))
