import json

import numpy as np
import pytest

from vqesim.cli import main


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


TRAIN_CONFIG = {
    "seed": 9,
    "model": {"family": "synthetic", "params": {"d": 8, "d_eff": 3, "kappa_eff": 2.0}},
    "train": {"p": 10, "eta_c": 1e-2, "max_steps": 3000},
}


class TestConfigErrors:
    def test_missing_file(self, tmp_path, capsys):
        assert main(["train", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1
        assert "config" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["train", "--config", str(path), "--out", str(tmp_path)]) == 1

    def test_unknown_model_family(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"model": {"family": "hubbard"}, "train": {"p": 2}})
        assert main(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
        assert "hubbard" in capsys.readouterr().err

    def test_missing_sweep_section(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"model": {"family": "tfi1d", "params": {"n": 2, "g": 0.3}},
                                      "ansatz": {"set": "tfi2"}})
        assert main(["threshold", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


class TestTrain:
    def test_writes_trace_and_manifest(self, tmp_path):
        cfg = write_config(tmp_path, TRAIN_CONFIG)
        out = tmp_path / "run"
        assert main(["train", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        assert (out / "trace.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "train"
        assert manifest["status"] == "converged"

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, TRAIN_CONFIG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["train", "--config", cfg, "--out", str(out1), "--quiet"]) == 0
        assert main(["train", "--config", cfg, "--out", str(out2), "--quiet"]) == 0
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_config(tmp_path, TRAIN_CONFIG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["train", "--config", cfg, "--out", str(out1), "--quiet"])
        main(["train", "--config", cfg, "--out", str(out2), "--seed", "123", "--quiet"])
        assert (out1 / "trace.csv").read_bytes() != (out2 / "trace.csv").read_bytes()


class TestThreshold:
    def test_end_to_end(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "seed": 4,
                "model": {"family": "synthetic", "params": {"d": 8, "d_eff": 3, "kappa_eff": 2.0}},
                "ansatz": {"set": "tfi2"},
                "sweep": {"p_grid": [1, 10], "trials_per_p": 5, "eta_c": 1e-2, "max_steps": 3000},
            },
        )
        out = tmp_path / "sweep"
        assert main(["threshold", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        rates = (out / "rates.csv").read_text().splitlines()
        assert rates[0] == "p,successes,trials,rate"
        assert len(rates) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["threshold_p"] == 10
        trials = (out / "trials.csv").read_text().splitlines()
        assert len(trials) == 11


class TestEffective:
    def test_writes_profile(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "seed": 2,
                "model": {"family": "tfi1d", "params": {"n": 4, "g": 0.3}},
                "ansatz": {"set": "tfi2"},
                "estimator": {"r_samples": 60},
            },
        )
        out = tmp_path / "eff"
        assert main(["effective", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        payload = json.loads((out / "effective.json").read_text())
        assert payload["d_eff"] == 4
        assert payload["compatible"] is True

    def test_basis_dump(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "seed": 2,
                "model": {"family": "tfi1d", "params": {"n": 2, "g": 0.3}},
                "ansatz": {"set": "tfi2"},
                "estimator": {"r_samples": 30},
                "dump_basis": True,
            },
        )
        out = tmp_path / "eff"
        assert main(["effective", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        raw = np.fromfile(out / "basis_q.c16", dtype="<c16")
        payload = json.loads((out / "effective.json").read_text())
        assert raw.size == 4 * payload["d_eff"]


class TestKappaScan:
    def test_writes_scan(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "seed": 6,
                "model": {"family": "xxz1d", "params": {"n": 4, "j_zz": 0.1}},
                "ansatz": {"set": "xxz4"},
                "scan": {"param": "j_zz", "values": [-0.5, 0.1]},
                "estimator": {"r_samples": 60},
            },
        )
        out = tmp_path / "scan"
        assert main(["kappa-scan", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        lines = (out / "scan.csv").read_text().splitlines()
        assert lines[0] == "param,kappa,kappa_eff,d_eff,degenerate_flag"
        assert len(lines) == 3
        assert all(line.split(",")[3] == "3" for line in lines[1:])


class TestVerify:
    def test_exit_zero_and_report(self, tmp_path):
        out = tmp_path / "verify"
        assert main(["verify", "--out", str(out), "--quiet"]) == 0
        lines = (out / "verify.txt").read_text().strip().splitlines()
        assert len(lines) == 9
        assert all(line.startswith("PASS") for line in lines)


class TestRuntimeAbort:
    def test_y_dimension_guard_exits_2(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "seed": 1,
                "model": {"family": "synthetic", "params": {"d": 128, "d_eff": 2, "kappa_eff": 2.0}},
                "train": {"p": 2, "eta_c": 1e-2, "max_steps": 5, "track_y": True,
                          "convergence_threshold": None},
            },
        )
        assert main(["train", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 2
        assert "runtime abort" in capsys.readouterr().err


class TestTraceSink:
    def test_save_traces_flag(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "seed": 4,
                "model": {"family": "synthetic", "params": {"d": 8, "d_eff": 3, "kappa_eff": 2.0}},
                "ansatz": {"set": "tfi2"},
                "sweep": {"p_grid": [10], "trials_per_p": 2, "eta_c": 1e-2,
                          "max_steps": 2000, "save_traces": True},
            },
        )
        out = tmp_path / "sweep"
        assert main(["threshold", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        traces = sorted((out / "traces").glob("*.csv"))
        assert [t.name for t in traces] == ["trace_p10_t0.csv", "trace_p10_t1.csv"]
        header = traces[0].read_text().splitlines()[0]
        assert header == "step,loss,overlap_error,dtheta_inf,dtheta_2,dy_op"
