"""Command-line interface: exit codes, emitted files and summary JSON."""

import csv
import json

import pytest

from feemarket import cli

BASE_CONFIG = {
    "market": {
        "target": 1.0,
        "k": 2,
        "lambda": 4.0,
        "valuation": {"kind": "normal", "m": 210.0, "w": 10.0},
    },
    "mechanism": {"rule": "eip1559", "d": 0.125},
    "b0": 170.0,
    "n_skip": 50,
    "n_iter": 40,
    "seed": 1,
}


@pytest.fixture
def config_path(tmp_path):
    def _write(doc):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return _write


def test_bound_default_quotient(capsys):
    assert cli.main(["bound", "--d", "0.125"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["factor"] == pytest.approx(0.5313, abs=1e-4)
    assert doc["upper_bound"] == pytest.approx(1.0627, abs=1e-4)


def test_bound_half_quotient(capsys):
    assert cli.main(["bound", "--d", "0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["factor"] == pytest.approx(0.6309, abs=1e-4)


def test_bound_rejects_closed_interval(capsys):
    assert cli.main(["bound", "--d", "0"]) == 2
    assert "d must lie in (0,1)" in capsys.readouterr().err


def test_simulate_writes_csv_and_summary(tmp_path, config_path, capsys):
    out = tmp_path / "traj.csv"
    code = cli.main(["simulate", config_path(BASE_CONFIG), "--out", str(out)])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rule"] == "eip1559"
    assert doc["band"][0] == 1.0
    assert doc["band"][1] == pytest.approx(1.0627, abs=1e-4)
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == BASE_CONFIG["n_iter"]
    assert set(rows[0]) == {
        "n",
        "base_fee",
        "block_size",
        "block_size_rel",
        "running_avg_rel",
    }
    assert int(rows[0]["n"]) == BASE_CONFIG["n_skip"]


def test_simulate_rejects_bad_quotient(config_path, capsys):
    bad = dict(BASE_CONFIG, mechanism={"rule": "eip1559", "d": 1.5})
    assert cli.main(["simulate", config_path(bad), "--out", "x.csv"]) == 2
    assert "d must lie in (0,1)" in capsys.readouterr().err


def test_simulate_rejects_unknown_key(config_path, capsys):
    bad = dict(BASE_CONFIG, typo_key=3)
    assert cli.main(["simulate", config_path(bad), "--out", "x.csv"]) == 2
    assert "typo_key" in capsys.readouterr().err


def test_seed_override_mean_field_invariant(tmp_path, config_path, capsys):
    # mean-field output is RNG-free: the seed override must not change it
    cfg = config_path(BASE_CONFIG)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", cfg, "--out", str(out1), "--seed", "1"]) == 0
    assert cli.main(["simulate", cfg, "--out", str(out2), "--seed", "99"]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()


def test_seed_override_moves_stochastic(tmp_path, config_path, capsys):
    doc = dict(BASE_CONFIG, demand={"mode": "stochastic", "arrivals": "poisson"})
    cfg = config_path(doc)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", cfg, "--out", str(out1), "--seed", "1"]) == 0
    assert cli.main(["simulate", cfg, "--out", str(out2), "--seed", "99"]) == 0
    capsys.readouterr()
    assert out1.read_bytes() != out2.read_bytes()


def test_simulate_byte_identical_reruns(tmp_path, config_path, capsys):
    doc = dict(BASE_CONFIG, demand={"mode": "stochastic", "arrivals": "poisson"})
    cfg = config_path(doc)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", cfg, "--out", str(out1)]) == 0
    assert cli.main(["simulate", cfg, "--out", str(out2)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_emits_both_csvs(tmp_path, config_path, capsys):
    doc = dict(
        BASE_CONFIG,
        sweep={"parameter": "d", "grid": [0.1, 0.2], "long_n": 500},
    )
    out_dir = tmp_path / "out"
    code = cli.main(
        ["sweep", config_path(doc), "--out-dir", str(out_dir), "--threads", "1"]
    )
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["grid_points"] == 2
    assert (out_dir / "attractors.csv").exists()
    assert (out_dir / "averages.csv").exists()
    with open(out_dir / "averages.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["param_value"]) for r in rows] == [0.1, 0.2]


def test_sweep_requires_section(config_path, capsys):
    assert cli.main(["sweep", config_path(BASE_CONFIG), "--out-dir", "x"]) == 2
    assert "sweep" in capsys.readouterr().err


def test_analyze_pipeline(tmp_path, capsys):
    data = tmp_path / "blocks.csv"
    rows = [f"{1000 + i},{15},{30}" for i in range(20)]
    data.write_text("number,gas_used,gas_limit\n" + "\n".join(rows) + "\n")
    out_dir = tmp_path / "out"
    code = cli.main(
        ["analyze", str(data), "--batch", "5", "--d", "0.125",
         "--out-dir", str(out_dir), "--split", "1010"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mean_relative"] == pytest.approx(0.5)
    assert doc["in_band"] is True
    assert doc["pre"]["n_batches"] == 2
    assert (out_dir / "batches.csv").exists()
    report = json.loads((out_dir / "report.json").read_text())
    assert report["overshoot_pct"] == pytest.approx(0.0)


def test_analyze_strict_bound_violation(tmp_path, capsys):
    data = tmp_path / "blocks.csv"
    rows = [f"{i},{54},{100}" for i in range(10)]
    data.write_text("number,gas_used,gas_limit\n" + "\n".join(rows) + "\n")
    code = cli.main(
        ["analyze", str(data), "--batch", "5", "--d", "0.125",
         "--out-dir", str(tmp_path / "o"), "--strict"]
    )
    assert code == 4
    capsys.readouterr()


def test_analyze_invariant_error_is_runtime(tmp_path, capsys):
    data = tmp_path / "blocks.csv"
    data.write_text("number,gas_used,gas_limit\n1,200,100\n")
    code = cli.main(["analyze", str(data), "--out-dir", str(tmp_path / "o")])
    assert code == 3
    capsys.readouterr()


def test_check_proper_eip(config_path, capsys):
    code = cli.main(["check-proper", config_path(BASE_CONFIG)])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["a1_ok"] is True
    assert doc["a2_ok"] is True
    assert doc["alpha_up"] == pytest.approx(1.125, abs=1e-6)


def test_check_proper_explicit_probes(config_path, capsys):
    code = cli.main(
        ["check-proper", config_path(BASE_CONFIG), "--probes", "100,200,300"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["probes"]) == 3


def test_missing_config_file(capsys):
    assert cli.main(["simulate", "/nonexistent.json", "--out", "x.csv"]) == 2
    capsys.readouterr()
