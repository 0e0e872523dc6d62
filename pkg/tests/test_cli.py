"""End-to-end CLI tests: subcommand behavior, file outputs, reproducibility,
usage errors, config files, and exit codes."""

import json

import numpy as np
import pytest

from equifdp import cli


def run_cli(args):
    return cli.main(list(args))


@pytest.fixture(autouse=True)
def isolated_outdir(tmp_path, monkeypatch):
    monkeypatch.delenv(cli.ENV_OUTDIR, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestTheory:
    def test_theta_zero_report(self, capsys):
        assert run_cli(
            ["theory", "--pi0", "0.5", "--mu", "2", "--alpha", "0.2", "--theta", "0"]
        ) == 0
        report = json.loads(capsys.readouterr().out)
        generic = report["theory"]
        closed = report["bh_closed_form"]
        assert generic["variance"] == pytest.approx(closed["sigma2"], rel=1e-10)
        assert generic["variance"] == pytest.approx(closed["variance"], rel=1e-10)
        assert generic["center"] == pytest.approx(0.1, abs=1e-12)
        assert generic["rate"] == "sqrt(m)"

    def test_case_ii_variance_is_c_squared(self, capsys):
        assert run_cli(
            ["theory", "--pi0", "0.5", "--mu", "2", "--alpha", "0.2", "--case-ii"]
        ) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["theory"]["variance"] == pytest.approx(
            report["theory"]["c_squared"], rel=1e-14
        )
        assert report["theory"]["variance"] == pytest.approx(
            report["bh_closed_form"]["c_squared"], rel=1e-10
        )

    def test_fixed_threshold_report(self, capsys):
        assert run_cli(
            [
                "theory", "--pi0", "0.5", "--mu", "2", "--alpha", "0.2",
                "--theta", "1", "--threshold", "0.4",
            ]
        ) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["procedure"] == {"kind": "fixed", "t": 0.4}
        assert "bh_closed_form" not in report

    def test_missing_alpha_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["theory", "--pi0", "0.5", "--mu", "2", "--theta", "0"])
        assert exc.value.code == 2

    def test_missing_regime_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["theory", "--pi0", "0.5", "--mu", "2", "--alpha", "0.2"])
        assert exc.value.code == 2

    def test_out_writes_files(self, tmp_path, capsys):
        out = tmp_path / "th"
        assert run_cli(
            [
                "theory", "--pi0", "0.5", "--mu", "2", "--alpha", "0.2",
                "--theta", "0", "--out", str(out),
            ]
        ) == 0
        assert (out / "theory.json").exists()
        assert (out / "config.json").exists()


SIM_ARGS = [
    "simulate", "--m", "1000", "--rho", "0", "--pi0", "0.5", "--mu", "2",
    "--alpha", "0.2", "--replicates", "200", "--seed", "7",
]


class TestSimulate:
    def test_smoke_run_writes_all_files(self, tmp_path):
        out = tmp_path / "sim"
        assert run_cli(SIM_ARGS + ["--out", str(out)]) == 0
        assert (out / "config.json").exists()
        assert (out / "replicates.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"]["seed"] == 7
        assert summary["theory"] is not None
        assert len(summary["per_replicate_fdp"]) == 200

    def test_identical_seeds_give_identical_csv(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_cli(SIM_ARGS + ["--out", str(out1)])
        run_cli(SIM_ARGS + ["--out", str(out2), "--workers", "3"])
        assert (out1 / "replicates.csv").read_bytes() == (out2 / "replicates.csv").read_bytes()

    def test_fixed_rho_without_oracle_reports_null_theory(self, tmp_path):
        out = tmp_path / "fixed"
        args = [
            "simulate", "--m", "500", "--rho", "0.3", "--pi0", "0.5", "--mu", "2",
            "--alpha", "0.2", "--replicates", "150", "--seed", "1", "--out", str(out),
        ]
        assert run_cli(args) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["theory"] is None
        assert any("regime" in w for w in summary["warnings"])

    def test_theta_flag_selects_case_i(self, tmp_path):
        out = tmp_path / "theta"
        args = [
            "simulate", "--m", "500", "--theta", "4", "--pi0", "0.5", "--mu", "2",
            "--alpha", "0.2", "--replicates", "150", "--seed", "1", "--out", str(out),
        ]
        assert run_cli(args) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["theory"]["regime"] == "case_i"
        assert summary["config"]["rho"] == pytest.approx(4.0 / 500)

    def test_missing_regime_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(
                ["simulate", "--m", "100", "--pi0", "0.5", "--mu", "2",
                 "--alpha", "0.2", "--replicates", "10"]
            )
        assert exc.value.code == 2

    def test_env_var_sets_outdir(self, tmp_path, monkeypatch):
        envdir = tmp_path / "from_env"
        monkeypatch.setenv(cli.ENV_OUTDIR, str(envdir))
        assert run_cli(SIM_ARGS) == 0
        assert (envdir / "summary.json").exists()

    def test_check_flag_passes_clean_run(self, tmp_path):
        out = tmp_path / "chk"
        assert run_cli(SIM_ARGS + ["--out", str(out), "--check"]) == 0

    def test_check_flag_turns_violations_into_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.setattr(cli, "check_tolerances", lambda s: ["forced violation"])
        out = tmp_path / "bad"
        assert run_cli(SIM_ARGS + ["--out", str(out), "--check"]) == cli.EXIT_CHECK_FAILED


class TestConfigFile:
    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# flat key = value config\n"
            "m = 1000\nrho = 0\npi0 = 0.5\nmu = 2\nalpha = 0.2\n"
            "replicates = 120\nseed = 7\n"
        )
        out = tmp_path / "cfgout"
        assert run_cli(
            ["simulate", "--config", str(cfg), "--replicates", "60", "--out", str(out)]
        ) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"]["m"] == 1000  # from file
        assert summary["config"]["replicates"] == 60  # flag wins

    def test_malformed_config_file(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this is not a key value pair\n")
        assert run_cli(["simulate", "--config", str(cfg)]) == cli.EXIT_RUNTIME


class TestRateStudyCommand:
    def test_small_grid_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(
                ["rate-study", "--m-grid", "100,200", "--theta", "0", "--pi0", "0.5",
                 "--mu", "2", "--alpha", "0.2", "--replicates", "50"]
            )
        assert exc.value.code == 2

    def test_three_point_study(self, tmp_path):
        out = tmp_path / "rate"
        args = [
            "rate-study", "--m-grid", "100,200,400", "--theta", "0", "--pi0", "0.5",
            "--mu", "2", "--alpha", "0.2", "--replicates", "120", "--seed", "3",
            "--out", str(out),
        ]
        assert run_cli(args) == 0
        lines = (out / "rate_study.csv").read_text().strip().splitlines()
        assert len(lines) == 4
        summary = json.loads((out / "summary.json").read_text())
        assert [row["m"] for row in summary["rows"]] == [100, 200, 400]


class TestOracleCommand:
    def test_rho_one_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(
                ["oracle", "--rho", "1.0", "--m", "100", "--pi0", "0.5", "--mu", "2",
                 "--alpha", "0.2", "--replicates", "50"]
            )
        assert exc.value.code == 2

    def test_run_and_config_echo(self, tmp_path):
        out = tmp_path / "oracle"
        args = [
            "oracle", "--rho", "0.3", "--m", "400", "--pi0", "0.5", "--mu", "2",
            "--alpha", "0.2", "--replicates", "150", "--seed", "9", "--out", str(out),
        ]
        assert run_cli(args) == 0
        config = json.loads((out / "config.json").read_text())
        assert config["command"] == "oracle"
        assert config["oracle"] is True
        assert config["rho"] == 0.3 and config["seed"] == 9
        summary = json.loads((out / "summary.json").read_text())
        assert summary["theory"]["theta"] == -1.0

    def test_reproducible(self, tmp_path):
        args = [
            "oracle", "--rho", "0.3", "--m", "300", "--pi0", "0.5", "--mu", "2",
            "--alpha", "0.2", "--replicates", "100", "--seed", "9",
        ]
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        run_cli(args + ["--out", str(out1)])
        run_cli(args + ["--out", str(out2)])
        assert (out1 / "replicates.csv").read_bytes() == (out2 / "replicates.csv").read_bytes()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(["--version"])
    assert exc.value.code == 0
    assert "equifdp" in capsys.readouterr().out
