"""Ruin methods: pluggable backends for ruin-probability computation."""

from __future__ import annotations

from typing import TYPE_CHECKING

from poolruin.exceptions import MethodMismatchError
from poolruin.methods.base import RuinMethod
from poolruin.methods.cached import CachedMethod
from poolruin.methods.closed_form import ClosedFormMethod
from poolruin.methods.fallback import FallbackMethod
from poolruin.methods.monte_carlo import MonteCarloMethod
from poolruin.methods.panjer import PanjerMethod

if TYPE_CHECKING:
    from poolruin.core.scenario import Scenario

METHOD_NAMES = ("auto", "closed", "panjer", "mc")


def auto_method(panjer: PanjerMethod | None = None) -> FallbackMethod:
    """Closed form when the claim law allows it, Panjer otherwise."""
    return FallbackMethod(ClosedFormMethod(), panjer or PanjerMethod(), name="auto")


def resolve_method(name: str, scenario: Scenario | None = None, seed: int | None = None) -> RuinMethod:
    """Build a method by name, configured from the scenario's ``panjer`` and ``mc`` blocks."""
    panjer = PanjerMethod()
    if scenario is not None:
        panjer = PanjerMethod(h=scenario.panjer.h, epsilon=scenario.panjer.epsilon)
    if name == "auto":
        return auto_method(panjer)
    if name == "closed":
        return ClosedFormMethod()
    if name == "panjer":
        return panjer
    if name == "mc":
        if scenario is None:
            return MonteCarloMethod(seed=seed)
        mc = scenario.mc
        return MonteCarloMethod(
            paths=mc.paths,
            horizon_claims=mc.horizon_claims,
            seed=mc.seed if seed is None else seed,
        )
    raise MethodMismatchError(f"Unknown method {name!r}; expected one of {', '.join(METHOD_NAMES)}")


__all__ = [
    "RuinMethod",
    "ClosedFormMethod",
    "PanjerMethod",
    "MonteCarloMethod",
    "FallbackMethod",
    "CachedMethod",
    "METHOD_NAMES",
    "auto_method",
    "resolve_method",
]
