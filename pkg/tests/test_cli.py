import json

import pytest

from gwtails.cli import main

BIN = '{"family":"finite","pmf":{"0":0.5,"2":0.5}}'


def test_sample_csv(tmp_path):
    out = tmp_path / "trees.csv"
    assert main(["sample", "--dist", BIN, "--trials", "50", "--seed", "1",
                 "--node-cap", "10000", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "trial,size,height,width,max_queue,harmonic_bound,truncated"
    assert len(lines) == 51


def test_walk_csv(tmp_path):
    out = tmp_path / "walks.csv"
    assert main(["walk", "--dist", BIN, "--trials", "30", "--seed", "1",
                 "--step-cap", "100000", "--stats", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "trial,sigma,max_s,h_sigma,censored"
    assert len(lines) == 31


def test_scales_csv(tmp_path):
    out = tmp_path / "scales.csv"
    assert main(["scales", "--dist", BIN, "--trials", "20", "--seed", "2",
                 "--step-cap", "5000", "--per-scale", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "trial,ell,N_ell,H_ell,M_ell,U_low,U_high"
    assert len(lines) > 20


def test_nl_and_qcheck(tmp_path, capsys):
    out = tmp_path / "nl.csv"
    assert main(["nl", "--dist", BIN, "--ell-max", "3", "--out", str(out)]) == 0
    rows = out.read_text().strip().split("\n")
    assert rows[0] == "ell,n_ell,method"
    assert rows[-1].startswith("3,160,")
    assert main(["qcheck", "--dist", BIN, "--n-grid", "100,400",
                 "--L", "2"]) == 0
    assert "fitted C_hat" in capsys.readouterr().out


def test_oracle_outputs(tmp_path, capsys):
    assert main(["oracle", "size-pmf", "--dist", BIN, "--n", "5"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[1] == "1,0.5"
    csv = tmp_path / "enum.csv"
    assert main(["oracle", "enumerate", "--dist", BIN, "--n", "5",
                 "--out", str(csv)]) == 0
    assert len(csv.read_text().strip().split("\n")) == 1 + 4  # header + trees


def test_dist_from_file(tmp_path):
    spec = tmp_path / "dist.json"
    spec.write_text(BIN)
    out = tmp_path / "t.csv"
    assert main(["sample", "--dist", str(spec), "--trials", "3", "--seed", "1",
                 "--node-cap", "100", "--out", str(out)]) == 0


def test_verify_exit_codes(tmp_path):
    cfg = {"schema": "gwtails/1", "distribution": json.loads(BIN),
           "target": "interval", "trials": 20000, "seed": 4,
           "interval_azb": [1, 3, 8], "step_cap": 10**6}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = main(["verify", "--config", str(cfg_path),
               "--out-dir", str(tmp_path / "res")])
    assert rc == 0
    assert (tmp_path / "res" / "tails.csv").exists()
    assert (tmp_path / "res" / "report.json").exists()
    assert (tmp_path / "res" / "plots" / "tails.svg").exists()
    # a config that must fail: the infinite-variance bound at an epsilon
    # far below its asymptotic regime (n_0(eps) >> the threshold used)
    bad = {"schema": "gwtails/1",
           "distribution": {"family": "power", "alpha": 1.5,
                            "target": "critical"},
           "target": "inf-var", "trials": 20000, "seed": 4,
           "size_threshold": 100, "eps": 0.01, "x_grid": [0.2]}
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad))
    rc = main(["verify", "--config", str(bad_path),
               "--out-dir", str(tmp_path / "res2")])
    assert rc == 1
