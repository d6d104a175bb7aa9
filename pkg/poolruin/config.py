from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path


def _flag(name: str) -> bool:
    return os.getenv(name, "").lower() in ("1", "true", "yes")


@dataclass(slots=True)
class Settings:
    """Numerical defaults, overridable through ``POOLRUIN_*`` environment variables."""

    # Panjer: span is mean / span_ratio, tail stops below epsilon or at atom_cap atoms
    panjer_span_ratio: float = float(os.getenv("POOLRUIN_PANJER_SPAN_RATIO", "500"))
    panjer_epsilon: float = float(os.getenv("POOLRUIN_PANJER_EPSILON", "1e-10"))
    atom_cap: int = int(os.getenv("POOLRUIN_ATOM_CAP", "2000000"))

    mc_paths: int = int(os.getenv("POOLRUIN_MC_PATHS", "100000"))
    mc_horizon_claims: int = int(os.getenv("POOLRUIN_MC_HORIZON_CLAIMS", "10000"))
    mc_seed: int = int(os.getenv("POOLRUIN_MC_SEED", "20240101"))
    mc_ceiling_factor: float = float(os.getenv("POOLRUIN_MC_CEILING_FACTOR", "30"))
    mc_chunk_size: int = int(os.getenv("POOLRUIN_MC_CHUNK_SIZE", "10000"))
    mc_workers: int = int(os.getenv("POOLRUIN_MC_WORKERS", "4"))

    tolerance: float = float(os.getenv("POOLRUIN_TOLERANCE", "1e-9"))
    order_tolerance: float = float(os.getenv("POOLRUIN_ORDER_TOLERANCE", "1e-6"))
    order_grid_points: int = int(os.getenv("POOLRUIN_ORDER_GRID_POINTS", "2001"))

    output_dir: Path = Path(os.getenv("POOLRUIN_OUTPUT_DIR", "./out"))
    log_level: str = os.getenv("POOLRUIN_LOG_LEVEL", "INFO")
    debug: bool = _flag("POOLRUIN_DEBUG")


settings = Settings()


def configure_logging(level: str | None = None) -> logging.Logger:
    """Attach one stderr handler to the ``poolruin`` logger and set its level.

    ``level`` overrides the settings; ``POOLRUIN_DEBUG`` wins over ``POOLRUIN_LOG_LEVEL``.
    """
    logger = logging.getLogger("poolruin")
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s: %(message)s", "%H:%M:%S"))
        logger.addHandler(handler)
    if level is None:
        level = "DEBUG" if settings.debug else settings.log_level
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    return logger


configure_logging()
