from __future__ import annotations

import math
from typing import Sequence

from poolruin.config import settings
from poolruin.core.pooled_losses import SurplusSpec
from poolruin.core.ruin import RuinCurve, ruin_pk_panjer


class PanjerMethod:
    """Pollaczek-Khinchine bounds through the Panjer recursion.

    ``h`` is an absolute span; when omitted every spec gets mean / ``span_ratio``.
    """

    name = "panjer"

    def __init__(
        self,
        h: float | None = None,
        epsilon: float | None = None,
        atom_cap: int | None = None,
        span_ratio: float | None = None,
    ) -> None:
        self.h = h
        self.epsilon = settings.panjer_epsilon if epsilon is None else epsilon
        self.atom_cap = settings.atom_cap if atom_cap is None else atom_cap
        self.span_ratio = settings.panjer_span_ratio if span_ratio is None else span_ratio

    def span_for(self, spec: SurplusSpec) -> float:
        return self.h if self.h is not None else spec.claim_law.mean() / self.span_ratio

    def supports(self, spec: SurplusSpec) -> tuple[bool, str]:
        mean = spec.claim_law.mean()
        if not math.isfinite(mean):
            return False, "claim law has no finite mean"
        return True, "finite-mean claim law"

    def curve(self, spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
        h = self.span_for(spec) if spec.claim_law.mean() > 0.0 else None
        return ruin_pk_panjer(spec, kappa_grid, h=h, epsilon=self.epsilon, atom_cap=self.atom_cap)
