from __future__ import annotations

import logging
from pathlib import Path

import pandas as pd

from poolruin.handlers.atomic import atomic_write

log = logging.getLogger("poolruin")

FLOAT_FORMAT = "%.9g"


class CsvHandler:
    """Result tables as CSV with nine significant digits."""

    @staticmethod
    def write(path: Path, frame: pd.DataFrame) -> None:
        atomic_write(path, lambda f: frame.to_csv(f, index=False, float_format=FLOAT_FORMAT), newline="")
        log.info("Wrote %d rows to %s", len(frame), path)

    @staticmethod
    def read(path: Path) -> pd.DataFrame:
        return pd.read_csv(path)
