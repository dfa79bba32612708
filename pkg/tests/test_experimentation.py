"""Tests for the experimentation module."""

import json
import os
from enum import Enum
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from stochastic_lifts.bk.events import Event
from stochastic_lifts.config import get_settings
from stochastic_lifts.core.measure import bernoulli_product, point_mass, uniform
from stochastic_lifts.core.serialization import measure_to_dict
from stochastic_lifts.errors import InputError, SizeLimitError
from stochastic_lifts.experimentation.config import ExperimentConfig, load_config, parse_rational
from stochastic_lifts.experimentation.report import Report, ReportWriter, jsonable
from stochastic_lifts.experimentation.runner import EXIT_FAILED, EXIT_INPUT, EXIT_OK, run
from stochastic_lifts.lift.fibre import FibreMap


def write_instance(path, mu, rho, pm):
    with open(path, "w") as f:
        json.dump({"mu": measure_to_dict(mu), "rho": measure_to_dict(rho), "pm": pm.to_dict()}, f)
    return str(path)


@pytest.fixture
def test_report():
    """A report with one passing check and two curve rows."""
    report = Report(command="perco-compare", config={"command": "perco-compare"})
    report.record("exact ladder", True, {"value": Fraction(1, 3)})
    report.rows = [
        {"p": "1/2", "plain": {"mean": 0.25, "standard_error": 0.01}},
        {"p": "3/4", "plain": {"mean": 0.5, "standard_error": 0.02}},
    ]
    return report


class TestSettings:
    """Test suite for environment-driven settings."""

    def test_defaults(self):
        """Test the default caps."""
        settings = get_settings()
        assert settings.bk_ground_cap == 20
        assert settings.delta_resolution == Fraction(1, 64)

    def test_environment_override(self, monkeypatch):
        """Test that a smaller cap from the environment is enforced."""
        monkeypatch.setenv("BK_GROUND_CAP", "5")
        get_settings.cache_clear()
        assert get_settings().bk_ground_cap == 5
        with pytest.raises(SizeLimitError):
            Event(6, 0)

    def test_invalid_environment(self, monkeypatch):
        """Test that a cap beyond the hard limit is refused."""
        monkeypatch.setenv("BK_GROUND_CAP", "21")
        get_settings.cache_clear()
        with pytest.raises(ValidationError):
            get_settings()


class TestExperimentConfig:
    """Test suite for run parameters."""

    @pytest.mark.parametrize("value,expected", [
        ("1/4", Fraction(1, 4)),
        (" 0.5 ", Fraction(1, 2)),
        (0.1, Fraction(1, 10)),
        (2, Fraction(2)),
    ])
    def test_parse_rational(self, value, expected):
        """Test the accepted forms of rationals."""
        assert parse_rational(value) == expected

    @pytest.mark.parametrize("value", [True, "abc", "1/0"])
    def test_parse_rational_rejects(self, value):
        """Test that booleans and malformed strings are refused."""
        with pytest.raises(InputError):
            parse_rational(value)

    def test_probability_grid(self):
        """Test that grids are parsed and echoed as strings."""
        config = ExperimentConfig(command="bk", p=["1/3", 0.5], jobs=3)
        assert config.p == [Fraction(1, 3), Fraction(1, 2)]
        echo = config.echo()
        assert echo["p"] == ["1/3", "1/2"]
        assert "jobs" not in echo

    def test_probability_out_of_range(self):
        """Test that probabilities outside [0, 1] are refused."""
        with pytest.raises(ValidationError):
            ExperimentConfig(command="bk", p=["3/2"])

    @pytest.mark.parametrize("command", ["perco-compare", "aug-compare", "cycles", "properties"])
    def test_randomized_commands_need_seed(self, command):
        """Test that randomized commands refuse to run without a seed."""
        with pytest.raises(ValidationError):
            ExperimentConfig(command=command)
        assert ExperimentConfig(command=command, seed=0).seed == 0

    def test_unknown_command(self):
        """Test that unknown commands are refused."""
        with pytest.raises(ValidationError):
            ExperimentConfig(command="sample")

    def test_load_config(self, tmp_path):
        """Test that overrides win over the file."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"command": "bk", "n": 2, "p": ["1/4"]}))
        config = load_config(str(path), {"p": ["1/2"], "seed": None})
        assert config.n == 2
        assert config.p == [Fraction(1, 2)]

    def test_load_config_missing(self, tmp_path):
        """Test that an unreadable file is an input error."""
        with pytest.raises(InputError):
            load_config(str(tmp_path / "missing.json"))


class TestReport:
    """Test suite for reports and their storage."""

    def test_jsonable(self):
        """Test the conversion of result values."""
        class Colour(Enum):
            RED = "red"

        value = {1: Fraction(2, 4), "set": {3, 1}, "np": np.int64(5), "enum": Colour.RED}
        assert jsonable(value) == {"1": "1/2", "set": [1, 3], "np": 5, "enum": "red"}

    def test_record(self, test_report):
        """Test that a failing verdict fails the report."""
        assert test_report.passed
        assert not test_report.record("mc ladder", False)
        assert not test_report.passed
        assert test_report.verdicts == {"exact ladder": True, "mc ladder": False}
        assert test_report.results["exact ladder"] == {"value": "1/3"}

    def test_to_json(self, test_report):
        """Test the JSON form."""
        data = json.loads(test_report.to_json())
        assert data["verdicts"] == {"exact ladder": True}
        assert "wall_time" not in data

    def test_to_dataframe(self, test_report):
        """Test that curve rows are flattened into columns."""
        frame = test_report.to_dataframe()
        assert list(frame.columns) == ["p", "plain.mean", "plain.standard_error"]
        assert frame["plain.mean"].tolist() == [0.25, 0.5]

    def test_csv_without_rows(self):
        """Test that verdicts become the CSV body when there are no rows."""
        report = Report(command="bk", config={})
        report.record("bk p=1/2", True)
        assert report.render("csv").splitlines() == ["check,holds", "bk p=1/2,True"]

    def test_writer(self, tmp_path, test_report):
        """Test that reports go to passed/ or failed/."""
        writer = ReportWriter(str(tmp_path / "reports"))
        passed = writer.save(test_report, name="curve 1")
        assert passed.endswith(os.path.join("passed", "curve_1.json"))
        test_report.record("mc ladder", False)
        failed = writer.save(test_report, name="curve", fmt="csv")
        assert os.path.dirname(failed) == writer.failed_dir
        assert pd.read_csv(failed).shape == (2, 3)
        assert writer.list_reports() == sorted([passed, failed])
        assert writer.list_reports(passed_only=True) == [passed]


class TestRun:
    """Test suite for command execution and exit codes."""

    def test_verify_single_fixture(self):
        """Test a passing fixture verification."""
        report, code = run(ExperimentConfig(command="verify", fixture="nontotal_labels"))
        assert code == EXIT_OK
        assert report.verdicts == {"nontotal_labels": True}

    def test_unknown_fixture(self):
        """Test that an unknown fixture is an input error."""
        report, code = run(ExperimentConfig(command="verify", fixture="missing"))
        assert code == EXIT_INPUT
        assert "missing" in report.error

    def test_coupling_instance(self, tmp_path):
        """Test the coupling command on a valid instance file."""
        pm = FibreMap.from_fibre_sizes((2,), (1,))
        path = write_instance(tmp_path / "ok.json", uniform([(0, 0), (0, 1)]), bernoulli_product(Fraction(1, 2), 2), pm)
        report, code = run(ExperimentConfig(command="coupling", instance=path))
        assert code == EXIT_OK
        assert report.verdicts == {"main_coupling": True, "dominates": True}

    def test_coupling_assumption_failure(self, tmp_path):
        """Test that a failing assumption exits with 1 and names the assumption."""
        pm = FibreMap.from_fibre_sizes((2,), (0,))
        path = write_instance(tmp_path / "bad.json", point_mass((1, 0)), point_mass((0, 0)), pm)
        report, code = run(ExperimentConfig(command="coupling", instance=path))
        assert code == EXIT_FAILED
        assert report.results["main_coupling"]["assumption"] == "B"

    def test_coupling_with_fibre_map_file(self, tmp_path):
        """Test that a separate fibre map file supplies the pm of the instance."""
        pm = FibreMap.from_fibre_sizes((2,), (1,))
        path = tmp_path / "measures.json"
        mu, rho = uniform([(0, 0), (0, 1)]), bernoulli_product(Fraction(1, 2), 2)
        path.write_text(json.dumps({"mu": measure_to_dict(mu), "rho": measure_to_dict(rho)}))
        fibres = tmp_path / "pm.json"
        fibres.write_text(json.dumps(pm.to_dict()))
        _, code = run(ExperimentConfig(command="coupling", instance=str(path), fibre_map=str(fibres)))
        assert code == EXIT_OK
        _, code = run(ExperimentConfig(command="coupling", instance=str(path), fibre_map=str(tmp_path / "none.json")))
        assert code == EXIT_INPUT

    def test_coupling_needs_instance(self):
        """Test that the coupling command without an instance is an input error."""
        _, code = run(ExperimentConfig(command="coupling"))
        assert code == EXIT_INPUT

    def test_probability_grid_echo(self):
        """Test that a p grid reaches the report as "num/den" strings."""
        report, code = run(ExperimentConfig(command="bk", exhaustive=2, p=["1/2", "0.25"]))
        assert code == EXIT_OK
        assert report.config["p"] == ["1/2", "1/4"]

    def test_bk_events(self):
        """Test the bk command on min-term events."""
        report, code = run(ExperimentConfig(command="bk", e1="0", e2="1", n=2, p=["1/3"]))
        assert code == EXIT_OK
        assert report.results["bk p=1/3"]["lhs"] == "1/9"

    def test_bk_hex_events(self):
        """Test the bk command on bitmask events."""
        report, code = run(ExperimentConfig(command="bk", e1="0xa", e2="0xc", n=2))
        assert code == EXIT_OK
        assert report.verdicts == {"bk p=1/2": True}

    def test_bk_needs_events(self):
        """Test that bk without events is an input error."""
        _, code = run(ExperimentConfig(command="bk"))
        assert code == EXIT_INPUT

    def test_bk_two_arms(self):
        """Test the two-arm check from the corner of a 3x3 box."""
        report, code = run(ExperimentConfig(command="bk", graph="box:3,3", radius=2))
        assert code == EXIT_OK
        assert report.results["two_arm p=1/2"]["holds"]

    def test_cells(self):
        """Test the cell audit with dumped assignment rows."""
        report, code = run(ExperimentConfig(command="cells", fixture="pendant", dump_cells=True))
        assert code == EXIT_OK
        assert report.results["audit pendant"]["centres"] == [0, 3, 8]
        assert len(report.rows) == 18

    def test_delta(self):
        """Test the delta command on the pendant fixture."""
        report, code = run(ExperimentConfig(command="delta", fixture="pendant", p=["1/2"], s=["1"]))
        assert code == EXIT_OK
        assert len(report.rows) == 3
        assert all(Fraction(row["delta"]) > 0 for row in report.rows)

    def test_aug_compare_needs_grid(self):
        """Test that aug-compare without a p grid is an input error."""
        _, code = run(ExperimentConfig(command="aug-compare", seed=1, trials=10))
        assert code == EXIT_INPUT

    def test_aug_compare_gap_verdict(self):
        """Test that the reach gap is checked only when cells are always open."""
        params = {"command": "aug-compare", "fixture": "ring6", "seed": 4, "p": ["1/2"], "radius": 2, "trials": 200}
        full, _ = run(ExperimentConfig(s=["1"], **params))
        assert full.verdicts["gap s=1"] == (full.results["gap s=1"]["max_gap_in_errors"] > 3)
        half, _ = run(ExperimentConfig(s=["1/2"], **params))
        assert "gap s=1" not in half.verdicts

    @pytest.mark.slow
    def test_aug_compare_torus_gap(self):
        """Test the torus comparison near the steep region with full cells."""
        config = ExperimentConfig(
            command="aug-compare", fixture="torus12", seed=11, p=["17/20"], s=["1"], radius=8, trials=10000, jobs=2
        )
        report, code = run(config)
        assert code == EXIT_OK
        assert report.verdicts["gap s=1"]

    def test_timing(self):
        """Test that wall time appears only on request."""
        report, _ = run(ExperimentConfig(command="verify", fixture="nontotal_labels"))
        assert report.wall_time is None
        report, _ = run(ExperimentConfig(command="verify", fixture="nontotal_labels", timing=True))
        assert report.wall_time is not None

    def test_reports_are_reproducible(self):
        """Test that a seeded randomized command gives identical reports."""
        config = ExperimentConfig(command="properties", seed=3, instances=5)
        first, code = run(config)
        second, _ = run(config)
        assert code == EXIT_OK
        assert first.to_json() == second.to_json()


    @pytest.mark.parametrize("params", [
        {"command": "perco-compare", "pair": "pendant_cycle", "p": ["1/2"], "radii": [1], "radius": 2, "trials": 2500},
        {"command": "aug-compare", "fixture": "ring6", "p": ["1/2"], "s": ["1"], "radius": 2, "trials": 2500},
    ])
    def test_reports_match_across_jobs(self, params):
        """Test that Monte Carlo reports do not depend on the number of worker processes."""
        serial, _ = run(ExperimentConfig(seed=9, jobs=1, **params))
        parallel, _ = run(ExperimentConfig(seed=9, jobs=3, **params))
        assert serial.error is None
        assert serial.to_json() == parallel.to_json()

class TestBatch:
    """Test suite for the batch script."""

    def test_run_batch(self, tmp_path):
        """Test a batch with a passing run and an invalid one."""
        from run_experiment import run_batch

        batch = tmp_path / "batch.json"
        batch.write_text(json.dumps({"name": "mini", "runs": [
            {"name": "labels", "command": "verify", "fixture": "nontotal_labels"},
            {"name": "unseeded", "command": "cycles"},
        ]}))
        summary = run_batch(str(batch), str(tmp_path / "reports"))
        assert summary["exit_code"].tolist() == [EXIT_OK, EXIT_INPUT]
        assert summary["checks"].tolist() == [1, 0]
        assert os.path.exists(tmp_path / "reports" / "passed" / "labels.json")

    def test_batch_without_runs(self, tmp_path):
        """Test that a batch file needs a list of runs."""
        from run_experiment import load_batch

        batch = tmp_path / "batch.json"
        batch.write_text(json.dumps({"name": "empty"}))
        with pytest.raises(ValueError):
            load_batch(str(batch))
