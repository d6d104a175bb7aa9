"""Scenario files: a pool, a sharing rule and the run configuration.

Participant, matrix and expectation indices are 1-based in files and 0-based once parsed.
Numbers may be written as fractions such as ``"3/11"``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Literal, Mapping

import numpy as np

from poolruin.config import settings
from poolruin.core.distributions import (
    DiscreteAtoms,
    Exponential,
    Gamma,
    LogNormal,
    MixtureComponent,
    ScaledMixture,
    SeverityModel,
)
from poolruin.core.pool_model import (
    AllocationMatrix,
    Participant,
    PoolSpec,
    build_mean_proportional,
    build_uniform,
    complete_alternative,
)
from poolruin.core.ruin import ParticipantCurves, pooling_benefit, reversal_points
from poolruin.exceptions import PoolRuinError, ScenarioError
from poolruin.handlers.io_handlers import read_mapping, write_mapping

log = logging.getLogger("poolruin")

MatrixRule = Literal["mean_proportional", "uniform", "alternative", "explicit"]
MATRIX_RULES = ("mean_proportional", "uniform", "alternative", "explicit")
DATA_PACKAGE = "poolruin.data"


@dataclass(frozen=True, slots=True)
class MatrixSpec:
    rule: MatrixRule
    fixed: tuple[tuple[tuple[int, int], float], ...] = ()
    entries: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True, slots=True)
class KappaGrid:
    min: float = 0.0
    max: float = 10.0
    steps: int = 101

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True, slots=True)
class MonteCarloConfig:
    paths: int = field(default_factory=lambda: settings.mc_paths)
    horizon_claims: int = field(default_factory=lambda: settings.mc_horizon_claims)
    seed: int = field(default_factory=lambda: settings.mc_seed)


@dataclass(frozen=True, slots=True)
class PanjerConfig:
    h: float | None = None
    epsilon: float = field(default_factory=lambda: settings.panjer_epsilon)


@dataclass(frozen=True, slots=True)
class Expectation:
    """Participants the source illustration reports as better off or worse off after pooling."""

    benefit: tuple[int, ...] = ()
    reversal: tuple[int, ...] = ()


@dataclass(frozen=True, slots=True)
class Scenario:
    name: str
    pool: PoolSpec
    matrix: MatrixSpec
    methods: tuple[str, ...] = ("auto",)
    kappa_grid: KappaGrid = field(default_factory=KappaGrid)
    mc: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    panjer: PanjerConfig = field(default_factory=PanjerConfig)
    output: Path | None = None
    expect: Expectation = field(default_factory=Expectation)
    description: str = ""


# --- parsing ---


class _Located:
    """Tracks the key path for error messages."""

    def __init__(self, source: str) -> None:
        self.source = source

    def fail(self, where: str, message: str) -> ScenarioError:
        return ScenarioError(f"{self.source}: {where}: {message}")

    def number(self, value: Any, where: str) -> float:
        if isinstance(value, bool):
            raise self.fail(where, f"expected a number, got {value!r}")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            try:
                return float(Fraction(value.strip()))
            except (ValueError, ZeroDivisionError) as exc:
                raise self.fail(where, f"cannot read {value!r} as a number") from exc
        raise self.fail(where, f"expected a number, got {type(value).__name__}")

    def integer(self, value: Any, where: str) -> int:
        number = self.number(value, where)
        if not number.is_integer():
            raise self.fail(where, f"expected an integer, got {value!r}")
        return int(number)

    def mapping(self, value: Any, where: str) -> Mapping[str, Any]:
        if not isinstance(value, Mapping):
            raise self.fail(where, f"expected a mapping, got {type(value).__name__}")
        return value

    def sequence(self, value: Any, where: str) -> list[Any]:
        if not isinstance(value, (list, tuple)):
            raise self.fail(where, f"expected a list, got {type(value).__name__}")
        return list(value)

    def required(self, data: Mapping[str, Any], key: str, where: str) -> Any:
        if key not in data:
            raise self.fail(where, f"missing required key {key!r}")
        return data[key]


def _parse_severity(loc: _Located, raw: Any, where: str) -> SeverityModel:
    data = loc.mapping(raw, where)
    kind = loc.required(data, "type", where)

    def num(key: str) -> float:
        return loc.number(loc.required(data, key, where), f"{where}.{key}")

    try:
        if kind == "exponential":
            return Exponential(num("rate"))
        if kind == "lognormal":
            return LogNormal(num("mu"), num("sigma2"))
        if kind == "gamma":
            return Gamma(num("shape"), num("rate"))
        if kind == "discrete":
            atoms = []
            for k, pair in enumerate(loc.sequence(loc.required(data, "atoms", where), f"{where}.atoms")):
                item = loc.sequence(pair, f"{where}.atoms[{k}]")
                if len(item) != 2:
                    raise loc.fail(f"{where}.atoms[{k}]", "expected [value, probability]")
                atoms.append((loc.number(item[0], f"{where}.atoms[{k}]"), loc.number(item[1], f"{where}.atoms[{k}]")))
            return DiscreteAtoms(tuple(atoms))
        if kind == "mixture":
            components = []
            raw_components = loc.sequence(loc.required(data, "components", where), f"{where}.components")
            for k, comp in enumerate(raw_components):
                at = f"{where}.components[{k}]"
                comp_data = loc.mapping(comp, at)
                components.append(
                    MixtureComponent(
                        loc.number(loc.required(comp_data, "weight", at), f"{at}.weight"),
                        loc.number(comp_data.get("scale", 1), f"{at}.scale"),
                        _parse_severity(loc, loc.required(comp_data, "base", at), f"{at}.base"),
                    )
                )
            return ScaledMixture(tuple(components))
    except ScenarioError:
        raise
    except PoolRuinError as exc:
        raise loc.fail(where, str(exc)) from exc
    raise loc.fail(f"{where}.type", f"unknown severity type {kind!r}")


def _parse_cell(loc: _Located, key: Any, n: int, where: str) -> tuple[int, int]:
    if isinstance(key, str):
        parts = key.replace(" ", "").split(",")
    else:
        parts = loc.sequence(key, where)
    if len(parts) != 2:
        raise loc.fail(where, f"matrix cell must be 'i,j', got {key!r}")
    i, j = (loc.integer(p, where) for p in parts)
    if not (1 <= i <= n and 1 <= j <= n):
        raise loc.fail(where, f"cell ({i},{j}) outside a {n}x{n} matrix")
    return i - 1, j - 1


def _parse_matrix(loc: _Located, raw: Any, n: int) -> MatrixSpec:
    data = loc.mapping(raw, "matrix")
    rule = loc.required(data, "rule", "matrix")
    if rule not in MATRIX_RULES:
        raise loc.fail("matrix.rule", f"unknown rule {rule!r}; expected one of {', '.join(MATRIX_RULES)}")
    if rule == "alternative":
        fixed_raw = loc.mapping(loc.required(data, "fixed", "matrix"), "matrix.fixed")
        fixed = tuple(
            (_parse_cell(loc, key, n, f"matrix.fixed[{key!r}]"), loc.number(value, f"matrix.fixed[{key!r}]"))
            for key, value in fixed_raw.items()
        )
        return MatrixSpec(rule="alternative", fixed=fixed)
    if rule == "explicit":
        rows = loc.sequence(loc.required(data, "entries", "matrix"), "matrix.entries")
        entries = tuple(
            tuple(
                loc.number(v, f"matrix.entries[{r}][{c}]")
                for c, v in enumerate(loc.sequence(row, f"matrix.entries[{r}]"))
            )
            for r, row in enumerate(rows)
        )
        if len(entries) != n or any(len(row) != n for row in entries):
            raise loc.fail("matrix.entries", f"expected a {n}x{n} matrix")
        return MatrixSpec(rule="explicit", entries=entries)
    return MatrixSpec(rule=rule)


def _participant_list(loc: _Located, raw: Any, n: int, where: str) -> tuple[int, ...]:
    out = []
    for k, value in enumerate(loc.sequence(raw, where)):
        index = loc.integer(value, f"{where}[{k}]")
        if not 1 <= index <= n:
            raise loc.fail(f"{where}[{k}]", f"participant {index} does not exist")
        out.append(index - 1)
    return tuple(out)


def parse_scenario(data: Any, source: str = "<scenario>") -> Scenario:
    """Build a Scenario from a mapping, raising ScenarioError with the failing key path."""
    loc = _Located(source)
    root = loc.mapping(data, "scenario")

    participants = []
    raw_participants = loc.sequence(loc.required(root, "participants", "scenario"), "participants")
    if not raw_participants:
        raise loc.fail("participants", "a pool needs at least one participant")
    for k, raw in enumerate(raw_participants):
        where = f"participants[{k + 1}]"
        item = loc.mapping(raw, where)
        severity = _parse_severity(loc, loc.required(item, "severity", where), f"{where}.severity")
        try:
            participants.append(
                Participant(
                    lam=loc.number(loc.required(item, "lam", where), f"{where}.lam"),
                    severity=severity,
                    kappa=loc.number(item.get("kappa", 0), f"{where}.kappa"),
                )
            )
        except (PoolRuinError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise loc.fail(where, str(exc)) from exc
    try:
        pool = PoolSpec(tuple(participants), loc.number(loc.required(root, "eta", "scenario"), "eta"))
    except (PoolRuinError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise loc.fail("eta", str(exc)) from exc
    n = pool.n

    matrix = _parse_matrix(loc, loc.required(root, "matrix", "scenario"), n)
    methods = tuple(str(m) for m in loc.sequence(root.get("methods", ["auto"]), "methods"))

    grid_data = loc.mapping(root.get("kappa_grid", {}), "kappa_grid")
    grid = KappaGrid(
        min=loc.number(grid_data.get("min", 0), "kappa_grid.min"),
        max=loc.number(grid_data.get("max", 10), "kappa_grid.max"),
        steps=loc.integer(grid_data.get("steps", 101), "kappa_grid.steps"),
    )
    if grid.min < 0 or grid.max < grid.min or grid.steps < 1:
        raise loc.fail("kappa_grid", "need 0 <= min <= max and steps >= 1")

    mc_data = loc.mapping(root.get("mc", {}), "mc")
    mc = MonteCarloConfig(
        paths=loc.integer(mc_data.get("paths", settings.mc_paths), "mc.paths"),
        horizon_claims=loc.integer(mc_data.get("horizon_claims", settings.mc_horizon_claims), "mc.horizon_claims"),
        seed=loc.integer(mc_data.get("seed", settings.mc_seed), "mc.seed"),
    )
    panjer_data = loc.mapping(root.get("panjer", {}), "panjer")
    h_raw = panjer_data.get("h")
    panjer = PanjerConfig(
        h=None if h_raw is None else loc.number(h_raw, "panjer.h"),
        epsilon=loc.number(panjer_data.get("epsilon", settings.panjer_epsilon), "panjer.epsilon"),
    )
    expect_data = loc.mapping(root.get("expect", {}), "expect")
    expect = Expectation(
        benefit=_participant_list(loc, expect_data.get("benefit", []), n, "expect.benefit"),
        reversal=_participant_list(loc, expect_data.get("reversal", []), n, "expect.reversal"),
    )
    output = root.get("output")
    return Scenario(
        name=str(root.get("name", Path(source).stem)),
        pool=pool,
        matrix=matrix,
        methods=methods,
        kappa_grid=grid,
        mc=mc,
        panjer=panjer,
        output=None if output is None else Path(output),
        expect=expect,
        description=str(root.get("description", "")),
    )


def load_scenario(path: Path) -> Scenario:
    return parse_scenario(read_mapping(path), str(path))


def build_matrix(scenario: Scenario) -> AllocationMatrix:
    """Resolve the scenario's sharing rule into a concrete matrix."""
    spec, pool = scenario.matrix, scenario.pool
    try:
        if spec.rule == "mean_proportional":
            return build_mean_proportional(pool)
        if spec.rule == "uniform":
            return build_uniform(pool.n)
        if spec.rule == "alternative":
            return complete_alternative(pool, dict(spec.fixed))
        return AllocationMatrix(spec.entries or ())
    except PoolRuinError as exc:
        raise ScenarioError(f"{scenario.name}: matrix: {exc}") from exc


# --- serialization ---


def severity_to_mapping(d: SeverityModel) -> dict[str, Any]:
    if isinstance(d, Exponential):
        return {"type": "exponential", "rate": d.rate}
    if isinstance(d, LogNormal):
        return {"type": "lognormal", "mu": d.mu, "sigma2": d.sigma2}
    if isinstance(d, Gamma):
        return {"type": "gamma", "shape": d.shape, "rate": d.rate}
    if isinstance(d, DiscreteAtoms):
        return {"type": "discrete", "atoms": [[v, p] for v, p in d.atoms]}
    if isinstance(d, ScaledMixture):
        return {
            "type": "mixture",
            "components": [
                {"weight": c.weight, "scale": c.scale, "base": severity_to_mapping(c.base)} for c in d.components
            ],
        }
    raise ScenarioError(f"Cannot serialize severity of kind {d.kind!r}")


def scenario_to_mapping(scenario: Scenario) -> dict[str, Any]:
    """Normalized mapping form; ``parse_scenario`` of it gives back an equal Scenario."""
    matrix: dict[str, Any] = {"rule": scenario.matrix.rule}
    if scenario.matrix.rule == "alternative":
        matrix["fixed"] = {f"{i + 1},{j + 1}": v for (i, j), v in scenario.matrix.fixed}
    if scenario.matrix.rule == "explicit":
        matrix["entries"] = [list(row) for row in scenario.matrix.entries or ()]
    data: dict[str, Any] = {
        "name": scenario.name,
        "description": scenario.description,
        "eta": scenario.pool.eta,
        "participants": [
            {"lam": p.lam, "kappa": p.kappa, "severity": severity_to_mapping(p.severity)}
            for p in scenario.pool.participants
        ],
        "matrix": matrix,
        "methods": list(scenario.methods),
        "kappa_grid": {
            "min": scenario.kappa_grid.min,
            "max": scenario.kappa_grid.max,
            "steps": scenario.kappa_grid.steps,
        },
        "mc": {"paths": scenario.mc.paths, "horizon_claims": scenario.mc.horizon_claims, "seed": scenario.mc.seed},
        "panjer": {"epsilon": scenario.panjer.epsilon},
        "expect": {
            "benefit": [i + 1 for i in scenario.expect.benefit],
            "reversal": [i + 1 for i in scenario.expect.reversal],
        },
    }
    if scenario.panjer.h is not None:
        data["panjer"]["h"] = scenario.panjer.h
    if scenario.output is not None:
        data["output"] = str(scenario.output)
    return data


def dump_scenario(scenario: Scenario, path: Path) -> None:
    write_mapping(path, scenario_to_mapping(scenario))
    log.info("Scenario written to %s", path)


# --- embedded scenarios ---


def embedded_scenario_names() -> list[str]:
    folder = resources.files(DATA_PACKAGE) / "scenarios"
    return sorted(entry.name.rsplit(".", 1)[0] for entry in folder.iterdir() if entry.name.endswith(".yaml"))


def load_embedded(name: str) -> Scenario:
    """Load one of the shipped scenarios by file stem."""
    entry = resources.files(DATA_PACKAGE) / "scenarios" / f"{name}.yaml"
    if not entry.is_file():
        raise ScenarioError(f"No embedded scenario named {name!r}")
    with resources.as_file(entry) as path:
        return load_scenario(path)


def figure_index() -> dict[int, list[str]]:
    with resources.as_file(resources.files(DATA_PACKAGE) / "figures.yaml") as path:
        raw = read_mapping(path)
    return {int(k): [str(name) for name in v] for k, v in raw.get("figures", {}).items()}


def figure_scenarios(figure: int) -> list[Scenario]:
    index = figure_index()
    if figure not in index:
        raise ScenarioError(f"Unknown figure {figure}; available: {', '.join(str(k) for k in sorted(index))}")
    return [load_embedded(name) for name in index[figure]]


# --- expectations ---


@dataclass(frozen=True, slots=True)
class ExpectationVerdict:
    participant: int
    kind: Literal["benefit", "reversal"]
    holds: bool
    detail: str


def check_expectations(curves: Mapping[int, ParticipantCurves], expect: Expectation) -> list[ExpectationVerdict]:
    """One verdict per participant named in ``expect``."""
    verdicts = []
    for i in expect.benefit:
        ok = pooling_benefit(curves[i])
        detail = "pooled <= stand-alone on the whole grid" if ok else "pooled above stand-alone somewhere"
        verdicts.append(ExpectationVerdict(i, "benefit", ok, detail))
    for i in expect.reversal:
        points = reversal_points(curves[i])
        detail = f"pooled above stand-alone from kappa={points[0]:.6g}" if points.size else "no reversal on the grid"
        verdicts.append(ExpectationVerdict(i, "reversal", bool(points.size), detail))
    return verdicts
