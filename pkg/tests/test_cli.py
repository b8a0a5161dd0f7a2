import json
import hashlib

import numpy as np
import pytest

from landauer_lab import cli


def run_ok(args):
    code = cli.run(args)
    assert code == 0
    return code


class TestSweepCommand:
    def test_row_count_contract(self, tmp_path):
        run_ok([
            "sweep", "--ds", "2", "--dr", "3", "--regime", "mid",
            "--tmin", "0.1", "--tmax", "10", "--points", "4", "--n", "5",
            "--seed", "7", "--out", str(tmp_path), "--name", "rows",
        ])
        trials = (tmp_path / "rows_trials.csv").read_text().splitlines()
        assert trials[0].split(",") == [c for c, _ in cli.TRIAL_COLUMNS]
        assert len(trials) == 1 + 20
        fit = (tmp_path / "rows_fit.csv").read_text().splitlines()
        assert fit[0].split(",") == list(cli.FIT_COLUMNS)
        assert len(fit) == 2

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        common = [
            "sweep", "--ds", "2", "--dr", "2", "--regime", "low",
            "--tmin", "0.5", "--tmax", "5", "--points", "3", "--n", "4",
            "--seed", "21",
        ]
        run_ok(common + ["--workers", "1", "--out", str(tmp_path / "a"), "--name", "det"])
        run_ok(common + ["--workers", "3", "--out", str(tmp_path / "b"), "--name", "det"])
        for name in ("det_trials.csv", "det_fit.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_floats_round_trip_exactly(self, tmp_path):
        run_ok([
            "sweep", "--ds", "2", "--dr", "2", "--regime", "low",
            "--tmin", "0.7", "--tmax", "3", "--points", "3", "--n", "2",
            "--seed", "3", "--out", str(tmp_path), "--name", "rt",
        ])
        lines = (tmp_path / "rt_trials.csv").read_text().splitlines()
        header = lines[0].split(",")
        beta_col = header.index("beta")
        betas = [float(line.split(",")[beta_col]) for line in lines[1:]]
        from landauer_lab import experiments

        config = experiments.SweepConfig(
            experiment="rt", d_s=2, d_r=2, regime="low",
            t_grid=tuple(np.geomspace(0.7, 3, 3)), n_per_point=2, master_seed=3,
        )
        expected = [experiments.run_trial(config, k).beta for k in range(6)]
        assert betas == expected


class TestBoundsCommand:
    def test_outputs_hull_csv(self, tmp_path):
        run_ok([
            "bounds", "--ds", "2", "--dr", "2", "--regime", "low",
            "--ttilde", "0.5", "--n", "60", "--seed", "5",
            "--out", str(tmp_path), "--name", "bc",
        ])
        hull = (tmp_path / "bc_hull.csv").read_text().splitlines()
        assert hull[0].split(",") == list(cli.HULL_COLUMNS)
        assert len(hull) > 1
        layers = {int(line.split(",")[1]) for line in hull[1:]}
        assert layers == set(range(max(layers) + 1))
        manifest = json.loads((tmp_path / "bc_manifest.json").read_text())
        assert "bivariate_median" in manifest

    def test_thermal_ensemble(self, tmp_path):
        run_ok([
            "bounds", "--ds", "2", "--dr", "3", "--regime", "mid",
            "--ttilde", "1.0", "--n", "10", "--seed", "9", "--unitary", "thermal",
            "--out", str(tmp_path), "--name", "th",
        ])
        lines = (tmp_path / "th_trials.csv").read_text().splitlines()
        header = lines[0].split(",")
        gamma_col = header.index("gamma")
        for line in lines[1:]:
            assert abs(float(line.split(",")[gamma_col])) < 1e-9


class TestLevyCommand:
    def test_schema_and_rows(self, tmp_path):
        run_ok([
            "levy", "--ds", "2", "--dr", "4", "--beta", "1.0", "--n", "150",
            "--eps-points", "5", "--seed", "13", "--out", str(tmp_path),
            "--name", "lv",
        ])
        lines = (tmp_path / "lv_levy.csv").read_text().splitlines()
        assert lines[0].split(",") == list(cli.LEVY_COLUMNS)
        assert len(lines) == 6
        for line in lines[1:]:
            fields = dict(zip(cli.LEVY_COLUMNS, line.split(",")))
            assert float(fields["empirical_tail"]) <= float(fields["bound"]) + 3 * float(
                fields["stderr"]
            )


class TestPurityCommand:
    def test_pure_tau(self, tmp_path):
        run_ok([
            "purity", "--ds", "2", "--dr", "2", "--n", "1000", "--tau", "pure",
            "--seed", "17", "--out", str(tmp_path), "--name", "pu",
        ])
        lines = (tmp_path / "pu_purity.csv").read_text().splitlines()
        assert lines[0].split(",") == list(cli.PURITY_COLUMNS)
        fields = dict(zip(cli.PURITY_COLUMNS, lines[1].split(",")))
        assert float(fields["expected_purity"]) == pytest.approx(0.8)
        assert abs(
            float(fields["mean_purity"]) - float(fields["expected_purity"])
        ) <= 3 * float(fields["purity_stderr"])


class TestGammaCommand:
    def test_flat_record(self, tmp_path, capsys):
        run_ok([
            "gamma", "--ds", "2", "--dr", "4", "--beta", "1.0", "--seed", "19",
            "--out", str(tmp_path), "--name", "g",
        ])
        record = dict(
            line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines()
        )
        assert record["d_s"] == "2"
        assert abs(float(record["decomposition_residual"])) < 1e-8
        assert float(record["mu"]) == pytest.approx(
            abs(float(record["Gamma"]) - 1.0), abs=1e-15
        )


class TestManifest:
    def test_checksums_match_files(self, tmp_path):
        run_ok([
            "sweep", "--ds", "2", "--dr", "2", "--regime", "high",
            "--tmin", "1", "--tmax", "4", "--points", "3", "--n", "2",
            "--seed", "23", "--out", str(tmp_path), "--name", "mf",
        ])
        manifest = json.loads((tmp_path / "mf_manifest.json").read_text())
        assert manifest["config"]["seed"] == 23
        assert manifest["skipped_trials"] == 0
        for name, digest in manifest["files"].items():
            actual = hashlib.sha256((tmp_path / name).read_bytes()).hexdigest()
            assert digest == f"sha256:{actual}"


class TestConfigFile:
    def test_config_provides_defaults_flags_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("ds = 2\ndr = 4\nbeta = 2.0\nseed = 31\n# comment\n\n")
        run_ok(["gamma", "--config", str(cfg), "--beta", "0.5", "--out", str(tmp_path)])
        record = dict(
            line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines()
        )
        assert record["d_s"] == "2"
        assert record["d_r"] == "4"
        assert float(record["beta"]) == 0.5

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("frobnicate = 1\n")
        assert cli.run(["gamma", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_bad_config_value_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("ds = two\n")
        assert cli.run(["gamma", "--config", str(cfg), "--out", str(tmp_path)]) == 2


class TestSeedFallback:
    def test_env_seed_used_when_flag_absent(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "77")
        run_ok(["gamma", "--ds", "2", "--dr", "2", "--beta", "1.0", "--out", str(tmp_path)])
        manifest = json.loads((tmp_path / "gamma_manifest.json").read_text())
        assert manifest["config"]["seed"] == 77

    def test_flag_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "77")
        run_ok([
            "gamma", "--ds", "2", "--dr", "2", "--beta", "1.0", "--seed", "5",
            "--out", str(tmp_path), "--name", "fb",
        ])
        manifest = json.loads((tmp_path / "fb_manifest.json").read_text())
        assert manifest["config"]["seed"] == 5


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, tmp_path):
        assert cli.run(["sweep", "--nonsense", "1", "--out", str(tmp_path)]) == 2

    def test_bad_choice_is_usage_error(self, tmp_path):
        assert cli.run(["sweep", "--regime", "tepid", "--out", str(tmp_path)]) == 2

    def test_invalid_combination_is_usage_error(self, tmp_path):
        # mid regime with a two-level reservoir has no defined scale.
        code = cli.run([
            "sweep", "--ds", "2", "--dr", "2", "--regime", "mid",
            "--tmin", "0.5", "--tmax", "2", "--points", "3", "--n", "2",
            "--seed", "1", "--out", str(tmp_path),
        ])
        assert code == 2

    def test_selftest_passes(self, tmp_path):
        assert cli.run(["selftest", "--seed", "11", "--out", str(tmp_path)]) == 0


class TestFormatValue:
    def test_bool_as_binary(self):
        assert cli.format_value(True) == "1"
        assert cli.format_value(False) == "0"

    def test_float_round_trip(self):
        for x in (1 / 3, 1e-17, 12345.678901234567, float("nan")):
            text = cli.format_value(x)
            if text == "nan":
                assert np.isnan(x)
            else:
                assert float(text) == x
