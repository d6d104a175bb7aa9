from poolruin.exceptions import ExtraNotInstalledError


def main() -> None:
    try:
        from poolruin.cli.app import app
    except ImportError as exc:  # pragma: no cover
        raise ExtraNotInstalledError(
            "Command-line commands require extra dependencies. Install: pip install poolruin[cli]"
        ) from exc
    app()
