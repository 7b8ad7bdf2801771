#!/usr/bin/env python3
"""Tests for the command-line front end (onicescu_cli.py)."""

import json
import math
from pathlib import Path

import onicescu_cli
import pytest
from families import make_entry
from oracle import DEFAULT_CONFIG
from utils import CONFIG_ENV_VAR, TOLERANCES, Tolerances

# pylint: disable=missing-function-docstring,too-few-public-methods


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload), encoding="utf-8")


def _run(capsys, *argv):
    status = onicescu_cli.main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def _run_json(capsys, *argv):
    status, out, err = _run(capsys, *argv)
    assert status == 0, err
    return json.loads(out)


@pytest.fixture(autouse=True)
def _no_settings_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)


class TestMeasureCommands:
    """Scalar commands with JSON output."""

    def test_energy_exponential(self, capsys):
        document = _run_json(capsys, "energy", "--family", "exponential", "--params", "lambda=2")
        assert document["command"] == "energy"
        assert document["value"] == pytest.approx(1.0, abs=1e-12)
        assert document["method"] == "closed_form"
        assert document["valid"] is True
        assert document["inputs"] == {
            "family": "exponential",
            "params": {"lambda": 2.0},
            "method": "auto",
        }
        assert document["diagnostics"]["renyi2"] == pytest.approx(0.0, abs=1e-12)

    def test_csd_normal(self, capsys):
        document = _run_json(
            capsys,
            "csd",
            "--family",
            "normal",
            "--params",
            "mu=0,sigma=1",
            "--params2",
            "mu=2,sigma=1",
        )
        assert document["value"] == pytest.approx(1.0, abs=1e-10)
        assert document["inputs"]["params2"] == {"mu": 2.0, "sigma": 1.0}
        assert document["diagnostics"]["jensen_gap"] == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("method", ["closed", "omega", "oracle"])
    def test_rho_methods_agree(self, capsys, method):
        document = _run_json(
            capsys,
            "rho",
            "--family",
            "exponential",
            "--params",
            "lambda=1",
            "--params2",
            "lambda=4",
            "--method",
            method,
        )
        assert document["value"] == pytest.approx(0.8, rel=1e-8)

    def test_cross_energy_at_omega(self, capsys):
        document = _run_json(
            capsys,
            "cross",
            "--family",
            "normal",
            "--params",
            "mu=0,sigma=1",
            "--params2",
            "mu=2,sigma=1",
            "--method",
            "omega",
            "--omega",
            "1.5",
        )
        assert document["method"] == "omega_trick"
        assert document["inputs"]["omega"] == 1.5
        assert document["value"] == pytest.approx(0.1037768744, rel=1e-9)

    def test_holder(self, capsys):
        document = _run_json(
            capsys,
            "holder",
            "--family",
            "exponential",
            "--params",
            "lambda=1",
            "--params2",
            "lambda=2",
            "--alpha",
            "2",
            "--gamma",
            "2",
        )
        assert document["value"] == pytest.approx(
            math.log(3 / (2 * math.sqrt(2))), rel=1e-12
        )
        assert document["diagnostics"]["beta"] == 2.0
        assert document["inputs"]["alpha"] == 2.0

    def test_holder_on_a_carrier_family_uses_the_oracle(self, capsys):
        document = _run_json(
            capsys,
            "holder",
            "--family",
            "poisson",
            "--params",
            "lambda=1",
            "--params2",
            "lambda=3",
            "--alpha",
            "2",
            "--gamma",
            "2",
        )
        assert document["method"] == "oracle"
        assert document["value"] > 0.0

    def test_entropy_with_legendre_diagnostic(self, capsys):
        document = _run_json(capsys, "entropy", "--family", "normal", "--params", "mu=0,sigma=1")
        assert document["value"] == pytest.approx(1.4189385332, rel=1e-10)
        assert document["diagnostics"]["legendre_entropy"] == pytest.approx(
            document["value"], abs=1e-12
        )

    def test_jensen(self, capsys):
        document = _run_json(
            capsys,
            "jensen",
            "--family",
            "exponential",
            "--params",
            "lambda=1",
            "--params2",
            "lambda=2",
        )
        assert document["value"] == pytest.approx(1 / 24)
        assert document["diagnostics"]["jensen_F"] == pytest.approx(
            0.5 * (-math.log(1.0) - math.log(2.0)) + math.log(1.5)
        )

    def test_mvn_parameters(self, capsys):
        document = _run_json(
            capsys, "energy", "--family", "mvn", "--params", "mu=0;0,cov=1;0;0;1"
        )
        assert document["value"] == pytest.approx(1 / (4 * math.pi))
        assert document["inputs"]["family"] == "mvn(d=2)"
        assert document["inputs"]["params"]["cov"] == [1.0, 0.0, 0.0, 1.0]

    def test_show_natural(self, capsys):
        document = _run_json(
            capsys,
            "energy",
            "--family",
            "normal",
            "--params",
            "mu=0,sigma=1",
            "--show-natural",
        )
        assert document["natural"]["p"] == pytest.approx([0.0, -0.5])

    def test_output_is_deterministic(self, capsys):
        argv = ("csd", "--family", "gamma", "--params", "alpha=2,beta=1")
        argv += ("--params2", "alpha=3.5,beta=0.5")
        _, first, _ = _run(capsys, *argv)
        _, second, _ = _run(capsys, *argv)
        assert first == second


class TestMixtureCommand:
    """Mixture energy from repeated components."""

    def test_uniform_weights_by_default(self, capsys):
        document = _run_json(
            capsys,
            "mixture",
            "--family",
            "exponential",
            "--component",
            "lambda=1",
            "--component",
            "lambda=2",
        )
        assert document["value"] == pytest.approx(0.7083333333, rel=1e-9)
        assert document["inputs"]["weights"] == [0.5, 0.5]

    def test_oracle_method(self, capsys):
        document = _run_json(
            capsys,
            "mixture",
            "--family",
            "exponential",
            "--component",
            "lambda=1",
            "--component",
            "lambda=2",
            "--weights",
            "0.5,0.5",
            "--method",
            "oracle",
        )
        assert document["method"] == "oracle"
        assert document["value"] == pytest.approx(0.7083333333, rel=1e-8)

    def test_bad_weights(self, capsys):
        status, _, err = _run(
            capsys,
            "mixture",
            "--family",
            "exponential",
            "--component",
            "lambda=1",
            "--weights",
            "0.7",
        )
        assert status == onicescu_cli.EXIT_USAGE
        assert "sum to 1" in err


class TestVerifyAndTable:
    """Closed forms against the oracle on the default grids."""

    def test_verify_normal(self, capsys):
        document = _run_json(capsys, "verify", "--family", "normal")
        assert document["passed"] is True
        checks = {row["check"] for row in document["rows"]}
        assert {"energy", "entropy", "table_energy", "cross_energy"} <= checks

    def test_verify_flags_the_literal_beta_expression(self, capsys):
        document = _run_json(capsys, "verify", "--family", "beta")
        assert document["passed"] is True
        literal = [row for row in document["rows"] if row["check"] == "table_energy_literal"]
        assert literal
        assert all(row["expected_disagreement"] for row in literal)
        assert any(not row["passed"] for row in literal)

    def test_verify_entry_reports_failures(self):
        strict = Tolerances(oracle_rtol=1e-30, entropy_oracle_rtol=1e-30)
        rows = onicescu_cli.verify_entry(make_entry("exponential"), DEFAULT_CONFIG, strict)
        assert any(not row["passed"] for row in rows)

    def test_verify_exit_status_on_failure(self, capsys, tmp_path):
        config_path = tmp_path / "strict.json"
        _write_json(config_path, {"tolerances": {"oracle_rtol": 1e-30}})
        status, out, _ = _run(
            capsys, "verify", "--family", "exponential", "--config", str(config_path)
        )
        assert status == onicescu_cli.EXIT_USAGE
        assert json.loads(out)["passed"] is False

    def test_table_marks_undefined_energy(self, capsys):
        document = _run_json(capsys, "table", "--families", "gamma")
        rows = document["rows"]
        assert [row["params"]["alpha"] for row in rows] == [2.0, 0.4]
        assert rows[0]["energy_closed"] == pytest.approx(0.25)
        assert rows[0]["energy_delta"] < 1e-8
        assert rows[1]["energy_closed"] == "EnergyUndefined"
        assert rows[1]["energy_oracle"] is None
        assert rows[1]["entropy_delta"] < 1e-6

    def test_table_csv(self, capsys):
        status, out, _ = _run(capsys, "table", "--families", "exponential", "--output", "csv")
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == ",".join(onicescu_cli.TABLE_COLUMNS)
        assert lines[1].startswith("exponential,lambda=2,")


class TestOutputFormats:
    """CSV and text rendering of scalar results."""

    def test_csv(self, capsys):
        status, out, _ = _run(
            capsys, "energy", "--family", "exponential", "--params", "lambda=2", "--output", "csv"
        )
        assert status == 0
        assert out.splitlines() == [
            "command,family,method,value,valid",
            "energy,exponential,closed_form,1,true",
        ]

    def test_text(self, capsys):
        status, out, _ = _run(
            capsys, "energy", "--family", "exponential", "--params", "lambda=2", "--output", "text"
        )
        assert status == 0
        assert out.splitlines()[0] == (
            "command=energy  family=exponential  method=closed_form  value=1  valid=true"
        )
        assert "  renyi2: " in out


class TestExitCodes:
    """Errors map to documented exit codes with an Error: message."""

    def test_domain_violation(self, capsys):
        status, out, err = _run(
            capsys, "energy", "--family", "gamma", "--params", "alpha=0.4,beta=1"
        )
        assert status == onicescu_cli.EXIT_DOMAIN
        assert out == ""
        assert err.startswith("Error: ")

    def test_carrier_family_rejects_omega(self, capsys):
        status, _, err = _run(
            capsys, "energy", "--family", "poisson", "--params", "lambda=1", "--method", "omega"
        )
        assert status == onicescu_cli.EXIT_USAGE
        assert "k(x) = 0" in err

    def test_omega_outside_support_is_a_usage_error(self, capsys):
        status, out, err = _run(
            capsys,
            "energy",
            "--family",
            "exponential",
            "--params",
            "lambda=2",
            "--method",
            "omega",
            "--omega",
            "-1",
        )
        assert status == onicescu_cli.EXIT_USAGE
        assert out == ""
        assert "not in the support" in err

    def test_overflowing_log_normalizer_is_a_usage_error(self, capsys):
        status, out, err = _run(
            capsys, "energy", "--family", "poisson", "--params", "lambda=1e300"
        )
        assert status == onicescu_cli.EXIT_USAGE
        assert out == ""
        assert "overflows double precision" in err

    def test_unrepresentable_theta_is_a_usage_error(self, capsys):
        status, _, err = _run(
            capsys, "energy", "--family", "normal", "--params", "mu=0,sigma=1e-200"
        )
        assert status == onicescu_cli.EXIT_USAGE
        assert "cannot be represented" in err

    def test_not_converged(self, capsys, tmp_path):
        config_path = tmp_path / "capped.json"
        _write_json(config_path, {"quadrature": {"series_max_terms": 1}})
        status, _, err = _run(
            capsys,
            "energy",
            "--family",
            "poisson",
            "--params",
            "lambda=3",
            "--method",
            "oracle",
            "--config",
            str(config_path),
        )
        assert status == onicescu_cli.EXIT_NOT_CONVERGED
        assert "term cap" in err

    @pytest.mark.parametrize(
        "argv,message",
        [
            (("energy", "--family", "wishart", "--params", "a=1"), "Unknown family"),
            (("energy", "--family", "normal"), "--params is required"),
            (("energy", "--family", "normal", "--params", "mu=0"), "Missing parameter"),
            (("energy", "--family", "normal", "--params", "mu"), "Malformed parameter"),
            (("energy", "--family", "normal", "--params", "mu=0,sigma=-1"), "sigma > 0"),
            (
                ("holder", "--family", "normal", "--params", "mu=0,sigma=1")
                + ("--params2", "mu=1,sigma=1"),
                "--alpha and --gamma",
            ),
            (
                ("entropy", "--family", "normal", "--params", "mu=0,sigma=1")
                + ("--method", "omega"),
                "not available",
            ),
        ],
    )
    def test_usage_errors(self, capsys, argv, message):
        status, _, err = _run(capsys, *argv)
        assert status == onicescu_cli.EXIT_USAGE
        assert message in err

    def test_argument_errors_exit_with_usage_status(self, capsys):
        status, _, err = _run(capsys, "energy", "--output", "yaml")
        assert status == onicescu_cli.EXIT_USAGE
        assert "Error:" in err
        assert onicescu_cli.main([]) == onicescu_cli.EXIT_USAGE


class TestSettings:
    """Settings file discovery and flag precedence."""

    def test_missing_explicit_file(self, capsys, tmp_path):
        status, _, err = _run(
            capsys,
            "energy",
            "--family",
            "exponential",
            "--params",
            "lambda=2",
            "--config",
            str(tmp_path / "missing.json"),
        )
        assert status == onicescu_cli.EXIT_USAGE
        assert "does not exist" in err

    def test_settings_from_environment(self, capsys, tmp_path, monkeypatch):
        config_path = tmp_path / "broken.json"
        config_path.write_text("{not json", encoding="utf-8")
        monkeypatch.setenv(CONFIG_ENV_VAR, str(config_path))
        status, _, err = _run(capsys, "energy", "--family", "exponential", "--params", "lambda=2")
        assert status == onicescu_cli.EXIT_USAGE
        assert "Invalid JSON" in err

    def test_flags_override_the_file(self, tmp_path):
        config_path = tmp_path / "settings.json"
        _write_json(config_path, {"quadrature": {"rel_tol": 1e-6, "abs_tol": 1e-9}})
        request = onicescu_cli.Request(
            command="energy",
            config=str(config_path),
            quadrature={"rel_tol": 1e-8, "transform": "rational_map"},
        )
        cfg, tolerances = onicescu_cli.build_config(request)
        assert cfg.rel_tol == 1e-8
        assert cfg.abs_tol == 1e-9
        assert cfg.transform.value == "rational_map"
        assert tolerances == TOLERANCES
