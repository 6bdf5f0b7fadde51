"""Command-line interface: exit codes, output formats, reproducibility."""

import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from cavteleport import cli

RUN_SCHEMA = {
    "type": "object",
    "required": ["schema", "config", "rows", "summary"],
    "properties": {
        "schema": {"const": "cavteleport/run/1"},
        "config": {"type": "object"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "trial", "alice_outcome", "controller_outcomes",
                    "probability", "correction", "fidelity",
                ],
                "properties": {
                    "trial": {"type": "integer"},
                    "alice_outcome": {"type": "string", "pattern": "^[ge]{4}$"},
                    "probability": {"type": "number"},
                    "fidelity": {"type": "number"},
                },
            },
        },
        "summary": {
            "type": "object",
            "required": ["trials", "mean_fidelity", "min_fidelity"],
        },
    },
}


def run_cli(args):
    return cli.main(args)


class TestRun:
    def test_default_input_succeeds(self, capsys):
        rc = run_cli(["run", "--trials", "20", "--seed", "42", "--format", "json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        jsonschema.validate(doc, RUN_SCHEMA)
        assert doc["summary"]["min_fidelity"] >= 1 - 1e-8
        assert len(doc["rows"]) == 20

    def test_unnormalized_input_rejected(self, capsys):
        rc = run_cli(["run", "--input", "1,0,0,0,0,0,0,0.1"])
        assert rc == 2

    def test_slightly_off_norm_autonormalizes(self, capsys):
        rc = run_cli(["run", "--input", "1.0000001,0,0,0,0,0,0,0", "--trials", "1"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "auto-normalizing" in captured.err

    def test_reproducible_bytes(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            rc = run_cli(
                [
                    "run", "--trials", "50", "--seed", "7",
                    "--input", "0.5,0,0.5,0,0.5,0,0.5,0",
                    "--format", "json", "--out", str(p),
                ]
            )
            assert rc == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_force_outcome(self, capsys):
        rc = run_cli(
            ["run", "--force-outcome", "eeee,e", "--trials", "2", "--format", "json"]
        )
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert all(r["alice_outcome"] == "eeee" for r in doc["rows"])
        assert all(r["correction"] == "I,sx" for r in doc["rows"])

    def test_bad_force_outcome(self, capsys):
        assert run_cli(["run", "--force-outcome", "xyz"]) == 2


class TestEnumerate:
    def test_default_csv(self, capsys):
        rc = run_cli(["enumerate", "--format", "csv"])
        assert rc == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 32
        eeee = next(
            r for r in rows
            if r["alice_outcome"] == "eeee" and r["controller_outcomes"] == "e"
        )
        assert eeee["correction"] == "I,sx"
        for r in rows:
            assert float(r["probability"]) == pytest.approx(1 / 32, abs=1e-12)
            assert float(r["fidelity"]) == pytest.approx(1.0, abs=1e-10)

    def test_two_controllers(self, capsys):
        rc = run_cli(["enumerate", "--controllers", "2", "--format", "csv"])
        assert rc == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 64

    def test_bad_controller_count(self, capsys):
        assert run_cli(["enumerate", "--controllers", "0"]) == 2


class TestVerifyTable:
    def test_self_compare(self, capsys):
        rc = run_cli(["verify-table", "--self-compare", "--format", "json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["summary"]["count_identical"] == 32
        assert doc["summary"]["count_published-rule-invalid"] == 0

    def test_paper_vs_derived_report(self, tmp_path):
        out = tmp_path / "report.csv"
        rc = run_cli(["verify-table", "--format", "csv", "--out", str(out)])
        assert rc == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 32
        assert set(rows[0]) == {
            "alice_outcome", "controller_outcomes", "reference_correction",
            "derived_correction", "classification",
        }
        assert all(r["classification"] != "published-rule-invalid" for r in rows)

    def test_multi_controller_needs_self_compare(self, capsys):
        assert run_cli(["verify-table", "--controllers", "2"]) == 2
        rc = run_cli(["verify-table", "--controllers", "2", "--self-compare"])
        assert rc == 0


class TestSweep:
    def test_detuning_csv(self, capsys):
        rc = run_cli(["sweep", "detuning", "--ratios", "5,10", "--format", "csv"])
        assert rc == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [r["delta_over_g"] for r in rows] == ["5.0", "10.0"]
        assert float(rows[0]["deficit"]) >= float(rows[1]["deficit"])

    def test_detuning_pair_syntax(self, capsys):
        rc = run_cli(["sweep", "detuning", "--ratios", "5:8,10:12", "--format", "json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["rows"][0]["omega_over_delta"] == 8.0

    def test_empty_ratio_list(self, capsys):
        assert run_cli(["sweep", "detuning", "--ratios", ""]) == 2

    def test_thermal_spread_reported(self, capsys):
        rc = run_cli(["sweep", "thermal", "--fock", "0,1", "--format", "json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["summary"]["spread"] > 0
        assert [r["initial_fock"] for r in doc["rows"]] == [0, 1]


class TestFeasibility:
    def test_defaults_pass(self, capsys):
        rc = run_cli(["feasibility", "--format", "json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["summary"]["verdict"] is True
        assert 0.5e-4 <= doc["rows"][0]["interaction_time_s"] <= 2e-4

    def test_g_khz_equivalent_to_default(self, capsys):
        run_cli(["feasibility", "--format", "json"])
        base = json.loads(capsys.readouterr().out)
        run_cli(["feasibility", "--g-khz", "24", "--format", "json"])
        khz = json.loads(capsys.readouterr().out)
        assert khz["rows"] == base["rows"]

    def test_short_cavity_fails(self, capsys):
        assert run_cli(["feasibility", "--t-cavity", "1e-5"]) == 1

    def test_missing_lifetime_is_config_error(self, capsys):
        assert run_cli(["feasibility", "--t-radiative", "none"]) == 2


class TestTextFormat:
    def test_text_has_header_and_summary(self, capsys):
        rc = run_cli(["enumerate", "--format", "text"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("# cavteleport/enumerate/1")
        assert "min_fidelity = " in out


def test_module_entry_point(tmp_path):
    out = tmp_path / "run.json"
    proc = subprocess.run(
        [
            sys.executable, "-m", "cavteleport",
            "run", "--trials", "2", "--seed", "3", "--format", "json",
            "--out", str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    assert doc["schema"] == "cavteleport/run/1"
