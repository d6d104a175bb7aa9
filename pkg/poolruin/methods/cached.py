"""CachedMethod: decorator that memoises curves of any ruin method."""

from __future__ import annotations

from typing import Sequence

from poolruin.core.pooled_losses import SurplusSpec
from poolruin.core.ruin import RuinCurve
from poolruin.methods.base import RuinMethod


class CachedMethod:
    """Wraps any RuinMethod with per-(spec, grid) result caching.

    Stand-alone curves do not depend on the allocation matrix, so a figure that compares
    two matrices computes them once.

    Usage:
        method = CachedMethod(PanjerMethod(h=0.01))
        ruin_curves(pool, build_mean_proportional(pool), method, grid)
        ruin_curves(pool, alternative, method, grid)
    """

    def __init__(self, method: RuinMethod) -> None:
        self._method = method
        self._cache: dict[tuple[SurplusSpec, tuple[float, ...]], RuinCurve] = {}
        self.name = method.name

    def supports(self, spec: SurplusSpec) -> tuple[bool, str]:
        return self._method.supports(spec)

    def curve(self, spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
        key = (spec, tuple(float(k) for k in kappa_grid))
        if key not in self._cache:
            self._cache[key] = self._method.curve(spec, kappa_grid)
        return self._cache[key]

    def clear_cache(self) -> None:
        """Clear all cached curves."""
        self._cache.clear()

    @property
    def cache_size(self) -> int:
        """Number of cached curves."""
        return len(self._cache)
