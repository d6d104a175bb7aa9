from __future__ import annotations

from typing import Sequence

from poolruin.core.distributions import exponential_components
from poolruin.core.pooled_losses import SurplusSpec
from poolruin.core.ruin import RuinCurve, closed_form_curve


class ClosedFormMethod:
    """Exponential and mixture-of-exponential claims."""

    name = "closed"

    def supports(self, spec: SurplusSpec) -> tuple[bool, str]:
        if exponential_components(spec.claim_law) is None:
            return False, f"{spec.claim_law.kind} claims are not a mixture of exponentials"
        return True, "mixture of exponentials"

    def curve(self, spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
        return closed_form_curve(spec, kappa_grid)
