"""Tests for the run-config parser and the command-line front end."""

import json

import numpy as np
import pytest
import yaml

from csiratio.cli import EXIT_ESTIMATOR, EXIT_INPUT, EXIT_OK, main
from csiratio.harness.output import config_hash
from csiratio.io import read_tensor
from csiratio.runconfig import ConfigError, draw_truth, load_run_config, parse_run_config

T = 1e-6

SINGLE = {
    "seed": 3,
    "paths": {"dynamic": [{"gain": [0.8, 0.3], "doppler": 120.0, "delay": 1.5e-7, "aoa": 0.4}],
              "static": [{"gain": [2.0, 0.0], "delay": 5.0e-8, "aoa": -0.2},
                         {"gain": [0.0, 1.0], "delay": 2.0e-7, "aoa": 0.6}]},
    "estimator": {"n_paths": 1, "static_mode": "oracle"},
}

EQUAL_STATIC = {
    "seed": 1,
    "paths": {"dynamic": [{"gain": [1.0, 0.0], "doppler": 62.5, "delay": 1.0e-7, "aoa": 0.3}],
              "static": [{"gain": [2.0, 0.0], "delay": 5.0e-8, "aoa": 0.0}]},
}


def write_config(tmp_path, data, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data, sort_keys=False))
    return path


def simulate(tmp_path, data, out="sim"):
    cfg = write_config(tmp_path, data)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / out)]) == EXIT_OK
    return cfg, tmp_path / out


class TestRunConfig:
    def test_unknown_key_reports_line(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("seed: 1\nsystem:\n  packet_count: 128\n  antena_count: 4\n")
        with pytest.raises(ConfigError) as info:
            load_run_config(path)
        assert info.value.line == 4
        assert info.value.field_name == "system.antena_count"
        assert "line 4" in str(info.value)

    def test_unknown_top_level(self):
        with pytest.raises(ConfigError, match="colour"):
            parse_run_config({"colour": "red"})

    @pytest.mark.parametrize("data", [{"paths": {"dynamic": [], "static": []}}, {"scenario": {"n_static": 0}}])
    def test_zero_static_paths_rejected(self, data):
        with pytest.raises(ConfigError, match="static"):
            parse_run_config(data)

    @pytest.mark.parametrize("data, field", [({"estimator": {"static_mode": "guess"}}, "estimator.static_mode"),
                                             ({"estimator": {"n_paths": 0}}, "estimator.n_paths"),
                                             ({"sweep": {"trials": 0}}, "sweep.trials"),
                                             ({"offsets": {"kind": "wild"}}, "offsets.kind")])
    def test_invalid_values(self, data, field):
        with pytest.raises(ConfigError) as info:
            parse_run_config(data)
        assert info.value.field_name == field

    def test_parse_error_has_line(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("seed: 1\nsystem: [1, 2\n")
        with pytest.raises(ConfigError) as info:
            load_run_config(path)
        assert info.value.line is not None

    def test_draw_truth_deterministic(self):
        cfg = parse_run_config({"seed": 9, "scenario": {"n_dynamic": 2, "n_static": 3}})
        assert draw_truth(cfg).to_dict() == draw_truth(cfg).to_dict()
        assert cfg.n_paths == 2

    def test_json_config(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(SINGLE))
        assert load_run_config(path).paths.n_dynamic == 1


class TestSimulate:
    def test_default_dims(self, tmp_path):
        _, out = simulate(tmp_path, {"seed": 0})
        assert read_tensor(out / "csi.csit").shape == (128, 64, 8)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 0
        assert manifest["config_hash"] == config_hash({"seed": 0})
        assert manifest["dims"] == [128, 64, 8]

    def test_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, SINGLE)
        for out in ("a", "b"):
            assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / out), "--csv"]) == EXIT_OK
        for name in ("csi.csit", "csi.csit.json", "truth.json", "csi.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_config(tmp_path, {"seed": 0})
        main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
        main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "1"])
        assert (tmp_path / "a" / "csi.csit").read_bytes() != (tmp_path / "b" / "csi.csit").read_bytes()

    def test_zero_path_config_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"scenario": {"n_static": 0}})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")]) == EXIT_INPUT
        assert "scenario.n_static" in capsys.readouterr().err

    def test_env_output_dir(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, {"seed": 0, "system": {"packet_count": 40, "taylor_window": 5}})
        monkeypatch.setenv("CSIRATIO_OUT", str(tmp_path / "env"))
        assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
        assert (tmp_path / "env" / "csi.csit").exists()

    def test_missing_config(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.yaml")]) == EXIT_INPUT


class TestEstimate:
    def test_round_trip(self, tmp_path):
        cfg, sim = simulate(tmp_path, SINGLE)
        out = tmp_path / "est"
        assert main(["estimate", "--config", str(cfg), "--tensor", str(sim / "csi.csit"), "--out", str(out)]) == EXIT_OK
        [rec] = json.loads((out / "estimates.json").read_text())["paths"]
        assert abs(rec["f_d_hz"] - 120.0) <= 1.0
        assert rec["theta_deg"] == pytest.approx(np.degrees(0.4), abs=0.1)
        assert abs(rec["tau_s"] - 1.5e-7) <= T / (4 * 64)
        assert (out / "spectrum_doppler.csv").exists() and (out / "spectrum_aoa.csv").exists()
        assert json.loads((out / "manifest.json").read_text())["exit_status"] == 0

    def test_guard_flags(self, tmp_path):
        cfg, sim = simulate(tmp_path, EQUAL_STATIC)
        out = tmp_path / "est"
        assert main(["estimate", "--config", str(cfg), "--tensor", str(sim / "csi.csit"), "--out", str(out)]) == EXIT_OK
        data = json.loads((out / "estimates.json").read_text())
        assert "joint-estimator" in data["flags"] and "guard-fired" in data["flags"]
        assert data["paths"][0]["theta_deg"] == pytest.approx(np.degrees(0.3), abs=0.1)

    def test_corrupted_magic(self, tmp_path, capsys):
        cfg, sim = simulate(tmp_path, SINGLE)
        data = bytearray((sim / "csi.csit").read_bytes())
        data[:4] = b"NOPE"
        (sim / "csi.csit").write_bytes(bytes(data))
        assert main(["estimate", "--config", str(cfg), "--tensor", str(sim / "csi.csit"),
                     "--out", str(tmp_path / "est")]) == EXIT_INPUT
        assert "format error" in capsys.readouterr().err

    def test_dimension_mismatch(self, tmp_path):
        _, sim = simulate(tmp_path, SINGLE)
        other = write_config(tmp_path, {**SINGLE, "system": {"antenna_count": 4}}, "other.yaml")
        assert main(["estimate", "--config", str(other), "--tensor", str(sim / "csi.csit"),
                     "--out", str(tmp_path / "est")]) == EXIT_INPUT

    def test_estimator_failure_writes_partial(self, tmp_path):
        # sixteen paths exceed what the Doppler stage can resolve
        cfg, sim = simulate(tmp_path, SINGLE)
        bad = write_config(tmp_path, {**SINGLE, "estimator": {"n_paths": 16}}, "bad.yaml")
        out = tmp_path / "est"
        status = main(["estimate", "--config", str(bad), "--tensor", str(sim / "csi.csit"), "--out", str(out)])
        assert status == EXIT_ESTIMATOR
        data = json.loads((out / "estimates.json").read_text())
        assert any(f.startswith("failed:") for f in data["flags"])


SMALL_SYSTEM = {"antenna_count": 4, "subcarrier_count": 16}


class TestExperimentCommands:
    def test_convergence(self, tmp_path):
        cfg = write_config(tmp_path, {"seed": 2, "system": SMALL_SYSTEM,
                                      "convergence": {"L_values": [0, 1], "Ls_values": [1, 2], "trials": 3}})
        out = tmp_path / "conv"
        assert main(["convergence", "--config", str(cfg), "--out", str(out), "--jobs", "1"]) == EXIT_OK
        rows = (out / "convergence.csv").read_text().splitlines()[1:]
        zero = [r.split(",") for r in rows if r.startswith("0,")]
        assert len(zero) == 2 and all(float(r[2]) == 0.0 for r in zero)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 2 and len(manifest["config_hash"]) == 64

    def test_sweep(self, tmp_path):
        cfg = write_config(tmp_path, {"seed": 2, "system": SMALL_SYSTEM, "sweep": {"snr_db": [20], "trials": 2}})
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg), "--out", str(out), "--jobs", "1"]) == EXIT_OK
        lines = (out / "nmse.csv").read_text().splitlines()
        assert len(lines) == 4
        assert json.loads((out / "manifest.json").read_text())["nmse_normalization"]["aoa"] == "pi^2"

    def test_sweep_needs_oracle(self, tmp_path):
        cfg = write_config(tmp_path, {"estimator": {"static_mode": "los"}, "sweep": {"trials": 1}})
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "s"), "--jobs", "1"]) == EXIT_INPUT

    def test_spectrum(self, tmp_path):
        cfg = write_config(tmp_path, {"seed": 0})
        out = tmp_path / "spec"
        assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        names = sorted(p.name for p in out.glob("spectrum_*.csv"))
        assert names == ["spectrum_aoa.csv", "spectrum_delay_path0.csv", "spectrum_delay_path1.csv",
                         "spectrum_doppler_conventional.csv", "spectrum_doppler_proposed.csv"]
        header = (out / "spectrum_aoa.csv").read_text().splitlines()[0]
        assert header == "phi_rad,theta_deg,spectrum_value"

    def test_idempotent(self, tmp_path):
        cfg = write_config(tmp_path, {"seed": 2, "system": SMALL_SYSTEM,
                                      "convergence": {"L_values": [1], "Ls_values": [1], "trials": 2}})
        for out in ("a", "b"):
            main(["convergence", "--config", str(cfg), "--out", str(tmp_path / out), "--jobs", "1"])
        assert (tmp_path / "a" / "convergence.csv").read_bytes() == (tmp_path / "b" / "convergence.csv").read_bytes()
