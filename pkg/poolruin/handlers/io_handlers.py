from __future__ import annotations

from pathlib import Path
from typing import Any

from poolruin.exceptions import ScenarioFileError
from poolruin.handlers.json_handler import JsonHandler
from poolruin.handlers.yaml_handler import YamlHandler

_BY_SUFFIX: dict[str, type[JsonHandler] | type[YamlHandler]] = {
    ".json": JsonHandler,
    ".yaml": YamlHandler,
    ".yml": YamlHandler,
}


def _handler_for(path: Path) -> type[JsonHandler] | type[YamlHandler]:
    try:
        return _BY_SUFFIX[path.suffix.lower()]
    except KeyError:
        raise ScenarioFileError(f"Unsupported file format: {path.suffix or path.name}") from None


def read_mapping(path: Path) -> dict[str, Any]:
    """Load a scenario file, JSON or YAML by suffix.

    Raises:
        ScenarioFileError: unknown suffix, unreadable or corrupt file, or a top level that
            is not a mapping.
    """
    data = _handler_for(path).read(path)
    if not isinstance(data, dict):
        raise ScenarioFileError(f"{path} must contain a mapping at the top level")
    return data


def write_mapping(path: Path, data: dict[str, Any]) -> None:
    _handler_for(path).write(path, data)
