"""FallbackMethod: chains several ruin methods, first supporting one wins."""

from __future__ import annotations

import logging
from typing import Sequence

from poolruin.core.pooled_losses import SurplusSpec
from poolruin.core.ruin import RuinCurve
from poolruin.exceptions import MethodMismatchError
from poolruin.methods.base import RuinMethod

log = logging.getLogger("poolruin")


class FallbackMethod:
    """Uses the first method whose ``supports`` accepts the spec."""

    def __init__(self, *methods: RuinMethod, name: str = "auto") -> None:
        if not methods:
            raise ValueError("At least one method required")
        self._methods = methods
        self.name = name

    def select(self, spec: SurplusSpec) -> RuinMethod:
        reasons = []
        for method in self._methods:
            ok, reason = method.supports(spec)
            if ok:
                return method
            log.debug("Method %s skipped: %s", method.name, reason)
            reasons.append(f"{method.name}: {reason}")
        raise MethodMismatchError(f"No method supports this claim law ({'; '.join(reasons)})")

    def supports(self, spec: SurplusSpec) -> tuple[bool, str]:
        try:
            return True, f"OK ({self.select(spec).name})"
        except MethodMismatchError as exc:
            return False, str(exc)

    def curve(self, spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
        return self.select(spec).curve(spec, kappa_grid)
