from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import yaml

from poolruin.exceptions import ScenarioFileError
from poolruin.handlers.atomic import atomic_write

log = logging.getLogger("poolruin")


class YamlHandler:
    """YAML scenario files, safe loader only. An empty document reads as ``{}``."""

    @staticmethod
    def read(path: Path) -> Any:
        try:
            with path.open("r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            log.error("Corrupt YAML file: %s: %s", path, exc)
            raise ScenarioFileError(f"Invalid YAML in {path}: {exc}") from exc
        except OSError as exc:
            raise ScenarioFileError(f"Cannot read {path}: {exc}") from exc
        return {} if data is None else data

    @staticmethod
    def write(path: Path, data: dict[str, Any]) -> None:
        # flow style keeps matrix rows and atoms on one line each
        atomic_write(
            path,
            lambda f: yaml.safe_dump(data, f, allow_unicode=True, sort_keys=False, default_flow_style=None),
        )
