"""Tests for scenario parsing, normalization and the embedded scenario set."""

import json
from pathlib import Path

import numpy as np
import pytest

from poolruin.core.distributions import DiscreteAtoms, Exponential, ScaledMixture
from poolruin.core.scenario import (
    build_matrix,
    dump_scenario,
    embedded_scenario_names,
    figure_index,
    figure_scenarios,
    load_embedded,
    load_scenario,
    parse_scenario,
    scenario_to_mapping,
)
from poolruin.exceptions import ScenarioError, ScenarioFileError


def minimal() -> dict:
    return {
        "name": "pair",
        "eta": 0.4,
        "participants": [
            {"lam": 1, "severity": {"type": "exponential", "rate": 1}},
            {"lam": 2, "severity": {"type": "gamma", "shape": 2, "rate": "1/2"}},
        ],
        "matrix": {"rule": "mean_proportional"},
    }


class TestParse:
    def test_defaults(self) -> None:
        scenario = parse_scenario(minimal())
        assert scenario.methods == ("auto",)
        assert scenario.kappa_grid.steps == 101
        assert scenario.pool.participants[0].kappa == 0.0
        assert scenario.expect.benefit == ()

    def test_fraction_strings(self) -> None:
        scenario = parse_scenario(minimal())
        assert scenario.pool.participants[1].severity.rate == pytest.approx(0.5)

    def test_alternative_cells_are_one_based(self) -> None:
        data = minimal() | {"matrix": {"rule": "alternative", "fixed": {"1,1": 0.5, "2, 1": 0.5}}}
        scenario = parse_scenario(data)
        assert dict(scenario.matrix.fixed) == {(0, 0): 0.5, (1, 0): 0.5}

    def test_mixture_severity(self) -> None:
        data = minimal()
        data["participants"][0]["severity"] = {
            "type": "mixture",
            "components": [
                {"weight": 0.5, "scale": 0, "base": {"type": "exponential", "rate": 1}},
                {"weight": 0.5, "base": {"type": "exponential", "rate": 2}},
            ],
        }
        law = parse_scenario(data).pool.participants[0].severity
        assert isinstance(law, ScaledMixture)
        assert law.zero_mass == pytest.approx(0.5)

    def test_discrete_severity(self) -> None:
        data = minimal()
        data["participants"][0]["severity"] = {"type": "discrete", "atoms": [[0, "1/2"], [2, "1/2"]]}
        assert parse_scenario(data).pool.participants[0].severity == DiscreteAtoms(((0.0, 0.5), (2.0, 0.5)))

    def test_expectations_are_zero_based(self) -> None:
        data = minimal() | {"expect": {"benefit": [1], "reversal": [2]}}
        expect = parse_scenario(data).expect
        assert expect.benefit == (0,)
        assert expect.reversal == (1,)


class TestParseErrors:
    @pytest.mark.parametrize(
        ("patch", "message"),
        [
            ({"eta": "abc"}, "eta"),
            ({"participants": []}, "at least one participant"),
            ({"matrix": {"rule": "random"}}, "unknown rule"),
            ({"matrix": {"rule": "explicit", "entries": [[1, 0]]}}, "2x2"),
            ({"matrix": {"rule": "alternative", "fixed": {"3,1": 0.5}}}, "outside"),
            ({"kappa_grid": {"min": 5, "max": 1}}, "kappa_grid"),
            ({"expect": {"benefit": [4]}}, "does not exist"),
        ],
    )
    def test_bad_fields(self, patch: dict, message: str) -> None:
        with pytest.raises(ScenarioError, match=message):
            parse_scenario(minimal() | patch)

    def test_unknown_severity_type(self) -> None:
        data = minimal()
        data["participants"][0]["severity"] = {"type": "pareto", "alpha": 3}
        with pytest.raises(ScenarioError, match=r"participants\[1\]\.severity\.type"):
            parse_scenario(data)

    def test_bad_atoms_are_located(self) -> None:
        data = minimal()
        data["participants"][1]["severity"] = {"type": "discrete", "atoms": [[0, 0.5], [1, 0.4]]}
        with pytest.raises(ScenarioError, match=r"participants\[2\]\.severity"):
            parse_scenario(data)

    def test_missing_key(self) -> None:
        data = minimal()
        del data["matrix"]
        with pytest.raises(ScenarioError, match="missing required key 'matrix'"):
            parse_scenario(data)

    def test_top_level_must_be_mapping(self) -> None:
        with pytest.raises(ScenarioError):
            parse_scenario([1, 2, 3])


class TestBuildMatrix:
    def test_uniform(self) -> None:
        scenario = parse_scenario(minimal() | {"matrix": {"rule": "uniform"}})
        assert np.allclose(build_matrix(scenario).array, 0.5)

    def test_failed_completion_is_a_scenario_error(self) -> None:
        scenario = parse_scenario(minimal() | {"matrix": {"rule": "alternative", "fixed": {"1,1": 0.5, "1,2": 0.5}}})
        with pytest.raises(ScenarioError, match="matrix"):
            build_matrix(scenario)

    def test_explicit_entries_outside_unit_interval(self) -> None:
        scenario = parse_scenario(minimal() | {"matrix": {"rule": "explicit", "entries": [[2, 0], [0, 1]]}})
        with pytest.raises(ScenarioError):
            build_matrix(scenario)


class TestFiles:
    def test_yaml_and_json_give_equal_scenarios(self, tmp_path: Path) -> None:
        yaml_file = tmp_path / "pair.yaml"
        json_file = tmp_path / "pair.json"
        dump_scenario(parse_scenario(minimal()), yaml_file)
        json_file.write_text(json.dumps(minimal()), encoding="utf-8")
        assert load_scenario(yaml_file) == load_scenario(json_file)

    def test_normalized_form_round_trips(self, tmp_path: Path) -> None:
        scenario = load_embedded("exponential_alt")
        target = tmp_path / "normalized.json"
        dump_scenario(scenario, target)
        assert load_scenario(target) == scenario

    def test_normalized_form_is_explicit(self) -> None:
        data = scenario_to_mapping(parse_scenario(minimal()))
        assert data["methods"] == ["auto"]
        assert data["kappa_grid"] == {"min": 0.0, "max": 10.0, "steps": 101}

    def test_unsupported_suffix(self, tmp_path: Path) -> None:
        target = tmp_path / "pair.toml"
        target.write_text("eta = 0.4", encoding="utf-8")
        with pytest.raises(ScenarioFileError, match="Unsupported"):
            load_scenario(target)


class TestEmbedded:
    def test_every_embedded_scenario_parses(self) -> None:
        names = embedded_scenario_names()
        assert len(names) == 12
        for name in names:
            scenario = load_embedded(name)
            assert scenario.name == name
            build_matrix(scenario)

    def test_unknown_embedded_name(self) -> None:
        with pytest.raises(ScenarioError):
            load_embedded("nope")

    def test_figure_index(self) -> None:
        index = figure_index()
        assert sorted(index) == [1, 2, 3, 4, 5]
        assert index[1] == ["exponential_mp", "exponential_alt"]

    def test_figure_scenarios(self) -> None:
        scenarios = figure_scenarios(2)
        assert [s.matrix.rule for s in scenarios] == ["mean_proportional", "explicit"]
        assert scenarios[0].pool.participants[2].severity == Exponential(2.0)

    def test_unknown_figure(self) -> None:
        with pytest.raises(ScenarioError, match="Unknown figure"):
            figure_scenarios(9)
