from __future__ import annotations

from typing import Sequence

from poolruin.config import settings
from poolruin.core.pooled_losses import SurplusSpec
from poolruin.core.ruin import RuinCurve, monte_carlo_curve


class MonteCarloMethod:
    """Seeded simulation at claim instants; every curve uses the same master seed."""

    name = "mc"

    def __init__(
        self,
        paths: int | None = None,
        horizon_claims: int | None = None,
        seed: int | None = None,
        chunk_size: int | None = None,
        workers: int | None = None,
    ) -> None:
        self.paths = settings.mc_paths if paths is None else paths
        self.horizon_claims = settings.mc_horizon_claims if horizon_claims is None else horizon_claims
        self.seed = settings.mc_seed if seed is None else seed
        self.chunk_size = settings.mc_chunk_size if chunk_size is None else chunk_size
        self.workers = settings.mc_workers if workers is None else workers

    def supports(self, spec: SurplusSpec) -> tuple[bool, str]:
        return True, "any claim law that can be sampled"

    def curve(self, spec: SurplusSpec, kappa_grid: Sequence[float]) -> RuinCurve:
        return monte_carlo_curve(
            spec,
            kappa_grid,
            paths=self.paths,
            horizon_claims=self.horizon_claims,
            seed=self.seed,
            chunk_size=self.chunk_size,
            workers=self.workers,
        )
