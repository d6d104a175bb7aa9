from __future__ import annotations

from pathlib import Path

import typer

from poolruin.config import configure_logging, settings
from poolruin.core.order_checks import check_pooled_dominance, normalized_chain_check
from poolruin.core.pool_model import ValidationReport, validate
from poolruin.core.ruin import curves_to_frame, ruin_curves
from poolruin.core.scenario import (
    Scenario,
    build_matrix,
    check_expectations,
    dump_scenario,
    figure_scenarios,
    load_scenario,
)
from poolruin.exceptions import MethodMismatchError, NetProfitError, ScenarioError
from poolruin.handlers.csv_handler import CsvHandler
from poolruin.methods import CachedMethod, resolve_method

app = typer.Typer(help="poolruin: ruin probabilities before and after proportional risk sharing")

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_ASSUMPTION = 2
EXIT_METHOD = 3

SCENARIO_OPTION = typer.Option(..., "--scenario", "-s", help="Scenario file (.yaml, .yml or .json)")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Output directory for CSV files")


@app.callback()
def global_options(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level")) -> None:
    if verbose:
        configure_logging("DEBUG")


def _ok(message: str) -> None:
    typer.secho(f"✔ {message}", fg=typer.colors.GREEN)


def _fail(message: str) -> None:
    typer.secho(f"✖ {message}", fg=typer.colors.RED)


def _load(path: Path) -> Scenario:
    try:
        return load_scenario(path)
    except ScenarioError as exc:
        _fail(f"Escenario inválido: {exc}")
        raise typer.Exit(code=EXIT_PARSE) from exc


def _output_dir(out: Path | None, scenario: Scenario | None = None) -> Path:
    if out is not None:
        return out
    if scenario is not None and scenario.output is not None:
        return scenario.output
    return settings.output_dir


def _print_report(report: ValidationReport) -> None:
    if report.full_allocation_ok:
        _ok("Asignación completa: cada columna suma 1")
    else:
        bad = [j + 1 for j, ok in enumerate(report.full_allocation) if not ok]
        _fail(f"Asignación completa: columnas {bad} no suman 1")
    if report.fairness_ok:
        _ok("Equidad actuarial: residuos dentro de la tolerancia")
    else:
        bad = {i + 1: f"{r:.3g}" for i, (r, ok) in enumerate(zip(report.fairness_residuals, report.fairness)) if not ok}
        _fail(f"Equidad actuarial: residuo por fila {bad}")
    if report.capacity_ok:
        _ok("Capacidad: a_ij b_j <= b_i para todo par")
    else:
        pairs = ", ".join(f"({v.i + 1},{v.j + 1}) exceso {v.excess:.6g}" for v in report.capacity)
        _fail(f"Capacidad violada en {pairs}")
    family = report.scale_family
    if family.ok:
        _ok(f"Familia de escala: {family.reason}")
    else:
        _fail(f"Familia de escala ({family.status}): {family.reason}")
    if all(report.net_profit):
        _ok("Beneficio neto tras el pool para todos los participantes")
    else:
        bad = [i + 1 for i, ok in enumerate(report.net_profit) if not ok]
        _fail(f"Beneficio neto tras el pool falla para {bad}")


@app.command("validate")
def validate_cmd(
    scenario: Path = SCENARIO_OPTION,
    dump_normalized: Path = typer.Option(None, "--dump-normalized", help="Write the normalized scenario here"),
    out: Path = OUT_OPTION,
) -> None:
    """Check full allocation, fairness, capacity and scale family of a scenario."""
    sc = _load(scenario)
    try:
        matrix = build_matrix(sc)
    except ScenarioError as exc:
        _fail(str(exc))
        raise typer.Exit(code=EXIT_PARSE) from exc

    typer.secho(f"\nValidación de {sc.name}", bold=True)
    report = validate(sc.pool, matrix)
    _print_report(report)

    if out is not None:
        CsvHandler.write(out / f"{sc.name}_validation.csv", report.to_frame())
    if dump_normalized is not None:
        dump_scenario(sc, dump_normalized)
        typer.echo(f"Escenario normalizado: {dump_normalized}")

    typer.echo("")
    if report.all_pass:
        typer.secho("✔ Todas las comprobaciones superadas", fg=typer.colors.GREEN, bold=True)
        raise typer.Exit(code=EXIT_OK)
    typer.secho("✖ Supuestos no satisfechos", fg=typer.colors.RED, bold=True)
    raise typer.Exit(code=EXIT_ASSUMPTION)


@app.command()
def ruin(
    scenario: Path = SCENARIO_OPTION,
    method: str = typer.Option(None, "--method", "-m", help="closed, panjer, mc or auto (default: scenario's first)"),
    out: Path = OUT_OPTION,
    seed: int = typer.Option(None, "--seed", help="Monte Carlo master seed"),
) -> None:
    """Stand-alone and pooled ruin curves of every participant, as CSV."""
    sc = _load(scenario)
    try:
        matrix = build_matrix(sc)
        chosen = resolve_method(method or sc.methods[0], sc, seed=seed)
        curves = ruin_curves(sc.pool, matrix, chosen, sc.kappa_grid.values())
    except ScenarioError as exc:
        _fail(str(exc))
        raise typer.Exit(code=EXIT_PARSE) from exc
    except MethodMismatchError as exc:
        _fail(f"Método incompatible: {exc}")
        raise typer.Exit(code=EXIT_METHOD) from exc
    except NetProfitError as exc:
        _fail(f"Sin beneficio neto: {exc}")
        raise typer.Exit(code=EXIT_ASSUMPTION) from exc

    target = _output_dir(out, sc) / f"{sc.name}_ruin.csv"
    CsvHandler.write(target, curves_to_frame(curves))
    _ok(f"Curvas de ruina ({chosen.name}) escritas en {target}")
    for verdict in check_expectations(curves, sc.expect):
        (_ok if verdict.holds else _fail)(f"Participante {verdict.participant + 1} [{verdict.kind}]: {verdict.detail}")


@app.command()
def reproduce(
    figure: int = typer.Option(..., "--figure", "-f", min=1, max=5, help="Figure number (1-5)"),
    out: Path = OUT_OPTION,
) -> None:
    """Recompute the curve data behind one of the embedded figures."""
    scenarios = figure_scenarios(figure)
    first = scenarios[0]
    method = CachedMethod(resolve_method(first.methods[0], first))
    target_dir = _output_dir(out)

    typer.secho(f"\nFigura {figure}", bold=True)
    all_hold = True
    for sc in scenarios:
        curves = ruin_curves(sc.pool, build_matrix(sc), method, sc.kappa_grid.values())
        target = target_dir / f"figure{figure}_{sc.name}.csv"
        CsvHandler.write(target, curves_to_frame(curves))
        typer.echo(f"{sc.name}: {target}")
        for verdict in check_expectations(curves, sc.expect):
            all_hold &= verdict.holds
            (_ok if verdict.holds else _fail)(
                f"  participante {verdict.participant + 1} [{verdict.kind}]: {verdict.detail}"
            )
    raise typer.Exit(code=EXIT_OK if all_hold else EXIT_ASSUMPTION)


@app.command("order-check")
def order_check(
    scenario: Path = SCENARIO_OPTION,
    out: Path = OUT_OPTION,
) -> None:
    """Convex-order checks of pooled payments against thinned stand-alone claims."""
    sc = _load(scenario)
    try:
        matrix = build_matrix(sc)
    except ScenarioError as exc:
        _fail(str(exc))
        raise typer.Exit(code=EXIT_PARSE) from exc
    target_dir = _output_dir(out, sc)

    typer.secho(f"\nOrden convexo en {sc.name}", bold=True)
    all_dominated = True
    for i in range(sc.pool.n):
        comparison = check_pooled_dominance(sc.pool, matrix, i)
        CsvHandler.write(target_dir / f"{sc.name}_order_{i + 1}.csv", comparison.to_frame())
        if comparison.dominated:
            _ok(f"Z_{i + 1} <=cx Y'_{i + 1}")
        else:
            all_dominated = False
            where = comparison.first_violation
            if where:
                detail = f"en t={where[0]:.6g} (brecha {where[1]:.3g})"
            else:
                detail = f"medias distintas ({comparison.mean_gap:.3g})"
            _fail(f"Z_{i + 1} no es menor que Y'_{i + 1} {detail}")

    if sc.pool.homogeneous_frequencies:
        chain = normalized_chain_check(sc.pool)
        for link in chain.links:
            CsvHandler.write(target_dir / f"{sc.name}_chain_{link.j + 1}_{link.i + 1}.csv", link.comparison.to_frame())
            text = f"Y_{link.j + 1}/b_{link.j + 1} <=cx Y_{link.i + 1}/b_{link.i + 1}"
            (_ok if link.comparison.dominated else _fail)(text)
    else:
        typer.echo("Frecuencias distintas: se omite la cadena normalizada")

    raise typer.Exit(code=EXIT_OK if all_dominated else EXIT_ASSUMPTION)
