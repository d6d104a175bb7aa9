"""Ruin method protocol: the contract for any ruin-probability backend."""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

from poolruin.core.pooled_losses import SurplusSpec
from poolruin.core.ruin import RuinCurve


@runtime_checkable
class RuinMethod(Protocol):
    """Protocol that any ruin backend must implement.

    Example implementations:
        - ClosedFormMethod, PanjerMethod, MonteCarloMethod (included)
        - A custom backend wrapping another numerical scheme

    Usage:
        class FlatMethod:
            name = "flat"

            def supports(self, spec: SurplusSpec) -> tuple[bool, str]:
                return True, "ok"

            def curve(self, spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
                psi = np.full(len(kappa_grid), spec.loading_ratio)
                return RuinCurve(np.asarray(kappa_grid), psi, self.name)
    """

    name: str

    def supports(self, spec: SurplusSpec) -> tuple[bool, str]:
        """Check whether the method can handle this claim law.

        Returns:
            Tuple of (is_supported, reason).
        """
        ...

    def curve(self, spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
        """Ruin probabilities of ``spec`` on every reserve of ``kappa_grid``."""
        ...
