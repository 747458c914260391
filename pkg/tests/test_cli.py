"""Command-line behavior: config parsing, exit codes, file outputs."""

import json
import subprocess
import sys

import numpy as np
import pytest

import bathdyn
from bathdyn.cli import main
from bathdyn.config import (
    ConfigError,
    RunConfig,
    as_bool,
    as_choice,
    as_float,
    as_float_list,
    as_int,
    parse_config_text,
)


def test_parse_config_text():
    text = """
    # comment line

    bath.gamma = 2.0
    run.steps=100
    potential.kind =  double_well
    """
    out = parse_config_text(text)
    assert out == {
        "bath.gamma": "2.0",
        "run.steps": "100",
        "potential.kind": "double_well",
    }

    with pytest.raises(ConfigError, match="line 2.*key=value"):
        parse_config_text("a=1\nnot a pair\n")
    with pytest.raises(ConfigError, match="line 3.*duplicate"):
        parse_config_text("a=1\nb=2\na=3\n")
    with pytest.raises(ConfigError, match="malformed key"):
        parse_config_text("Bad.Key=1\n")
    with pytest.raises(ConfigError, match="malformed key"):
        parse_config_text("bath..gamma=1\n")


def test_value_casters():
    assert as_float("2.5e-3") == 2.5e-3
    with pytest.raises(ConfigError, match="expected a number"):
        as_float("two")
    assert as_int("42") == 42
    with pytest.raises(ConfigError, match="expected an integer"):
        as_int("4.2")
    assert as_bool("Yes") is True
    assert as_bool("off") is False
    with pytest.raises(ConfigError, match="expected a boolean"):
        as_bool("maybe")
    assert as_float_list(" 1, 2.5 ,3 ") == (1.0, 2.5, 3.0)
    with pytest.raises(ConfigError, match="comma-separated"):
        as_float_list(" , ")
    cast = as_choice("a", "b")
    assert cast("a") == "a"
    with pytest.raises(ConfigError, match="expected one of"):
        cast("c")


def test_run_config_accounting():
    cfg = RunConfig({"bath.gamma": "2.0", "bath.mass": "1.0"})
    assert cfg.require("bath.gamma", as_float) == 2.0
    with pytest.raises(ConfigError, match="missing required config key"):
        cfg.require("run.steps", as_int)
    assert cfg.get("run.dt", as_float, 0.01) == 0.01
    assert cfg.resolved["run.dt"] == 0.01
    with pytest.raises(ConfigError, match="unknown config key: bath.mass"):
        cfg.finish()
    cfg.get("bath.mass", as_float, 1.0)
    cfg.finish()
    with pytest.raises(ConfigError, match="invalid value for bath.gamma"):
        RunConfig({"bath.gamma": "x"}).require("bath.gamma", as_float)


def _write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _read_manifest(out_dir):
    lines = (out_dir / "manifest.json").read_text().splitlines()
    return [json.loads(line) for line in lines]


def test_det_check_default_run(tmp_path):
    rc = main(["det-check", "--out", str(tmp_path), "--quiet"])
    assert rc == 0
    rows = [json.loads(l) for l in
            (tmp_path / "det_checks.jsonl").read_text().splitlines()]
    assert len(rows) >= 8
    for row in rows:
        assert set(row) >= {"case", "computed", "target", "pass"}
        assert row["pass"] is True
    records = _read_manifest(tmp_path)
    kinds = [r["record"] for r in records]
    assert kinds[0] == "run"
    assert "config" in kinds and "output" in kinds and "check" in kinds


def test_kernels_drude_outputs_and_manifest(tmp_path):
    cfg = _write_config(
        tmp_path,
        "bath.model=drude\nbath.omega_d=10.0\nbath.gamma=1.0\n",
    )
    out = tmp_path / "out"
    rc = main(["kernels", "--config", cfg, "--out", str(out), "--quiet"])
    assert rc == 0
    for name in ("noise_freq.csv", "spectral_density.csv",
                 "friction_time.csv", "noise_time.csv"):
        assert (out / name).exists(), name

    records = _read_manifest(out)
    run = records[0]
    assert run["record"] == "run"
    assert run["command"] == "kernels"
    assert run["version"] == bathdyn.__version__
    config_rec = next(r for r in records if r["record"] == "config")
    assert config_rec["values"]["bath.omega_d"] == 10.0
    outputs = {r["path"] for r in records if r["record"] == "output"}
    assert "noise_freq.csv" in outputs
    checks = [r for r in records if r["record"] == "check"]
    assert checks and all(c["pass"] for c in checks)

    header = (out / "noise_freq.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "omega"


def test_kernels_runs_are_reproducible(tmp_path):
    cfg = _write_config(tmp_path, "bath.model=drude\nbath.omega_d=5.0\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["kernels", "--config", cfg, "--out", str(a), "--quiet"]) == 0
    assert main(["kernels", "--config", cfg, "--out", str(b), "--quiet"]) == 0
    assert (a / "noise_freq.csv").read_bytes() == (b / "noise_freq.csv").read_bytes()
    assert (a / "noise_time.csv").read_bytes() == (b / "noise_time.csv").read_bytes()


def test_kernels_missing_cutoff_exits_2(tmp_path, capsys):
    cfg = _write_config(tmp_path, "bath.model=drude\n")
    rc = main(["kernels", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "bath.omega_d" in capsys.readouterr().err


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = _write_config(tmp_path, "bath.model=ohmic\nbath.typo=1\n")
    rc = main(["kernels", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "unknown config key: bath.typo" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path, capsys):
    rc = main(["kernels", "--config", str(tmp_path / "absent.cfg"),
               "--out", str(tmp_path)])
    assert rc == 2
    assert "cannot read config file" in capsys.readouterr().err


def test_simulate_unstable_fp_dt_exits_1(tmp_path, capsys):
    cfg = _write_config(
        tmp_path,
        "sim.kind=smoluchowski\nfp.dt=10.0\ngrid.nx=64\n",
    )
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "suggested dt" in capsys.readouterr().err


def test_simulate_requires_kind(tmp_path, capsys):
    cfg = _write_config(tmp_path, "run.steps=10\n")
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "sim.kind" in capsys.readouterr().err

    bad = _write_config(tmp_path, "sim.kind=quantum\n", name="bad.cfg")
    rc = main(["simulate", "--config", bad, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "sim.kind" in capsys.readouterr().err


def test_decohere_rejects_classical_limit(tmp_path, capsys):
    cfg = _write_config(tmp_path, "bath.hbar=0.0\n")
    rc = main(["decohere", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "hbar" in capsys.readouterr().err


def test_simulate_ensemble_csv_roundtrip(tmp_path):
    cfg = _write_config(
        tmp_path,
        "sim.kind=ensemble\nrun.dt=0.01\nrun.steps=50\nrun.n_traj=400\n"
        "run.seed=77\nrun.x0=0.5\nbath.gamma=2.0\nbath.k_bt=0.5\n"
        "potential.kind=harmonic\n",
    )
    out = tmp_path / "o"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    lines = (out / "moments.csv").read_text().splitlines()
    assert lines[0] == "key,value"
    for line in lines[1:]:
        cells = line.split(",")
        val = float(cells[1])
        # 17 significant digits reproduce the double exactly
        assert format(val, ".17g") == cells[1]
    assert (out / "histogram.csv").exists()

    hist = np.genfromtxt(out / "histogram.csv", delimiter=",", names=True)
    widths = hist["bin_right"] - hist["bin_left"]
    assert abs(float((hist["density"] * widths).sum()) - 1.0) < 1e-9


def test_seed_flag_overrides_config(tmp_path):
    base = ("sim.kind=ensemble\nrun.steps=40\nrun.n_traj=200\n"
            "run.seed=1\nrun.x0=0.3\n")
    cfg = _write_config(tmp_path, base)
    a, b, c = (tmp_path / n for n in "abc")
    assert main(["simulate", "--config", cfg, "--out", str(a), "--quiet"]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(b), "--quiet",
                 "--seed", "99"]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(c), "--quiet",
                 "--seed", "99"]) == 0
    ma = (a / "moments.csv").read_bytes()
    mb = (b / "moments.csv").read_bytes()
    mc = (c / "moments.csv").read_bytes()
    assert mb == mc
    assert ma != mb
    rec = next(r for r in _read_manifest(b) if r["record"] == "config")
    assert rec["values"]["run.seed"] == 99


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bathdyn", "det-check",
         "--out", str(tmp_path), "--quiet"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "det_checks.jsonl").exists()
