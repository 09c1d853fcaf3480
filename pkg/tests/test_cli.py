import json
import subprocess
import sys

import numpy as np
import pytest

from msep_precoding import cli


BASE_CONFIG = {
    "k": 2,
    "m": 3,
    "alpha_s": 4,
    "alpha_x": 4,
    "snr_grid_db": [0.0, 10.0],
    "trials": 4,
    "symbols_per_channel": 2,
    "noise_draws_per_symbol": 2,
    "seed": 7,
    "methods": ["QMSEP-UQ"],
    "out": "out.csv",
}


def write_config(tmp_path, **overrides):
    cfg = dict(BASE_CONFIG)
    cfg.update(overrides)
    cfg["out"] = str(tmp_path / cfg["out"])
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg, indent=1))
    return path, cfg["out"]


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "msep_precoding.cli", *args],
        capture_output=True,
        text=True,
    )


def test_run_minimal_config(tmp_path):
    path, out = write_config(tmp_path)
    proc = run_cli("run", str(path))
    assert proc.returncode == 0, proc.stderr
    lines = open(out).read().strip().split("\n")
    assert lines[0] == "method,snr_db,ser,std_err,errors,decisions,seed"
    assert len(lines) == 1 + 2  # header + |methods| x |grid|


def test_run_unknown_key_rejected(tmp_path):
    path, _ = write_config(tmp_path, bogus_key=1)
    proc = run_cli("run", str(path))
    assert proc.returncode == 2
    assert "bogus_key" in proc.stderr


def test_run_unknown_method_rejected(tmp_path):
    path, _ = write_config(tmp_path, methods=["Nope"])
    proc = run_cli("run", str(path))
    assert proc.returncode == 2
    assert "Nope" in proc.stderr


def test_run_missing_file():
    proc = run_cli("run", "/nonexistent/config.json")
    assert proc.returncode == 2


def test_run_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"k": 2,\n  broken\n}')
    proc = run_cli("run", str(path))
    assert proc.returncode == 2
    assert ":2:" in proc.stderr  # line-anchored message


def test_run_reruns_byte_identical(tmp_path):
    path, out = write_config(tmp_path)
    assert cli.cmd_run(str(path)) == 0
    first = open(out, "rb").read()
    assert cli.cmd_run(str(path)) == 0
    assert open(out, "rb").read() == first


def test_run_seed_override_changes_output(tmp_path):
    path, out = write_config(tmp_path)
    assert cli.cmd_run(str(path)) == 0
    base = open(out).read()
    assert cli.cmd_run(str(path), seed=8) == 0
    assert open(out).read() != base


def test_verify_gradients_passes(capsys):
    assert cli.cmd_verify("gradients") == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out


def test_verify_unknown_suite():
    assert cli.cmd_verify("nonsense") == 2


def test_verify_negative_control(monkeypatch, capsys):
    from msep_precoding import objectives

    true_grad = objectives.qmsep_gradient

    def broken(data, x_r):
        g = true_grad(data, x_r)
        return g + 1e-3 * np.ones_like(g)

    monkeypatch.setattr(objectives, "qmsep_gradient", broken)
    code = cli.cmd_verify("gradients")
    captured = capsys.readouterr()
    assert code == 1
    assert "[FAIL]" in captured.out
    assert "counterexample" in captured.err
    payload = captured.err.split("counterexample:", 1)[1].strip()
    blob = json.loads(payload)
    assert "H_re" in blob and "sigma_w" in blob


def test_figure_unknown_name():
    assert cli.cmd_figure("fig-unknown") == 2


def test_figure_smoke_insufficient_samples(tmp_path, capsys):
    out = str(tmp_path / "fig.csv")
    code = cli.cmd_figure("fig-qpsk-k2m5", trials=2, seed=5, out=out)
    captured = capsys.readouterr().out
    assert code == 0
    assert "insufficient samples, skipped" in captured
    lines = open(out).read().strip().split("\n")
    assert lines[0] == "method,snr_db,ser,std_err,errors,decisions,seed"
    assert len(lines) == 1 + 2 * 3  # two methods, three SNR points


def test_main_entrypoint_usage():
    proc = run_cli("--help")
    assert proc.returncode == 0
    for cmd in ("run", "verify", "figure"):
        assert cmd in proc.stdout
