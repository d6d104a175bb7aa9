from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from poolruin.exceptions import ScenarioFileError
from poolruin.handlers.atomic import atomic_write

log = logging.getLogger("poolruin")


class JsonHandler:
    """Scenario JSON files. Non-finite numbers are rejected both ways."""

    @staticmethod
    def read(path: Path) -> Any:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioFileError(f"Cannot read {path}: {exc}") from exc
        try:
            return json.loads(text, parse_constant=_reject_constant)
        except (json.JSONDecodeError, ValueError) as exc:
            log.error("Corrupt JSON file: %s: %s", path, exc)
            if isinstance(exc, json.JSONDecodeError):
                detail = f"{exc.msg} (line {exc.lineno}, col {exc.colno})"
            else:
                detail = str(exc)
            raise ScenarioFileError(f"Invalid JSON in {path}: {detail}") from exc

    @staticmethod
    def write(path: Path, data: dict[str, Any]) -> None:
        atomic_write(path, lambda f: json.dump(data, f, ensure_ascii=False, indent=2, allow_nan=False))


def _reject_constant(name: str) -> float:
    raise ValueError(f"{name} is not a valid scenario number")
