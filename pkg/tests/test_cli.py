import csv
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from erwlab.cli import main
from erwlab.io import read_manifest, sha256_file


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_oracle_pmf_rows(tmp_path, capsys):
    assert main(["oracle", "--p", "0.75", "--s", "0.5", "--n", "2", "--what", "pmf", "--out", str(tmp_path)]) == 0
    rows = [(int(r["n"]), int(r["k"]), float(r["prob"])) for r in _rows(tmp_path / "pmf.csv")]
    assert rows == [(2, -2, pytest.approx(0.375)), (2, 0, pytest.approx(0.25)), (2, 2, pytest.approx(0.375))]
    assert "pmf_mass=1" in capsys.readouterr().out


def test_oracle_meet(tmp_path, capsys):
    assert main(["oracle", "--p", "0.5", "--n", "1", "--what", "meet", "--out", str(tmp_path)]) == 0
    row = _rows(tmp_path / "meet.csv")[0]
    assert float(row["meeting_probability"]) == 0.5
    assert "meeting_probability=0.5 " in capsys.readouterr().out


def test_oracle_all_tables_and_manifest(tmp_path):
    assert main(["oracle", "--p", "0.6", "--n", "50", "--out", str(tmp_path), "--format", "jsonl"]) == 0
    manifest = read_manifest(tmp_path / "manifest.json")
    assert set(manifest["outputs"]) == {"pmf.jsonl", "moments.jsonl", "meet.jsonl", "diff_pmf.jsonl"}
    for name, digest in manifest["outputs"].items():
        assert sha256_file(tmp_path / name) == digest
    assert manifest["rng_family"].startswith("philox4x32")
    moments = [json.loads(line) for line in (tmp_path / "moments.jsonl").read_text().splitlines()]
    assert len(moments) == 50 and set(moments[0]) == {"n", "mean", "second_moment"}


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["oracle", "--n", "2", "--out", str(tmp_path)]) == 1
    assert "usage" in capsys.readouterr().err
    for argv in (
        ["oracle", "--p", "1.5", "--n", "2"],
        ["ensemble", "--p", "0.5", "--horizon", "10", "--replicas", "5", "--seed", "1", "--checkpoints", "5,3"],
        ["frobnicate"],
    ):
        assert main(argv + ["--out", str(tmp_path)]) == 1
    assert main(["pair", "--p", "0.5", "--horizon", "10", "--replicas", "5", "--seed", "1", "--n-min-lil", "4", "--out", str(tmp_path)]) == 1
    assert main(["--help"]) == 0


def test_oracle_range_error_exit_2(tmp_path):
    assert main(["oracle", "--p", "0.5", "--n", "30000", "--what", "pmf", "--out", str(tmp_path)]) == 2


def test_ensemble_same_seed_byte_identical(tmp_path):
    argv = ["ensemble", "--p", "0.6", "--horizon", "5000", "--replicas", "2000", "--seed", "3"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b"), "--workers", "4"]) == 0
    a = (tmp_path / "a" / "walk_moments.csv").read_bytes()
    assert a == (tmp_path / "b" / "walk_moments.csv").read_bytes()
    rows = _rows(tmp_path / "a" / "walk_moments.csv")
    assert [int(r["n"]) for r in rows] == [10, 100, 1000, 5000]
    assert float(rows[-1]["norm_variance"]) == pytest.approx(1 / 0.6, rel=0.1)


def test_ensemble_normalized_variance_near_one(tmp_path):
    argv = ["ensemble", "--p", "0.5", "--horizon", "100000", "--replicas", "10000", "--seed", "1", "--checkpoints", "100000"]
    assert main(argv + ["--out", str(tmp_path)]) == 0
    row = _rows(tmp_path / "walk_moments.csv")[0]
    assert float(row["norm_variance"]) == pytest.approx(1.0, rel=0.05)


def test_budget_exit_2(tmp_path, monkeypatch):
    monkeypatch.setenv("ERWLAB_BUDGET", "1e6")
    argv = ["--p", "0.5", "--horizon", "10000", "--replicas", "1000", "--seed", "1", "--out", str(tmp_path)]
    assert main(["ensemble"] + argv) == 2
    assert main(["pair"] + argv) == 2


def test_pair_s1_all_meet(tmp_path):
    assert main(["pair", "--p", "0.85", "--s", "1", "--horizon", "2000", "--replicas", "300", "--seed", "2", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "pairs.csv")
    assert len(rows) == 300
    assert all(int(r["meeting_count"]) >= 1 for r in rows)


def test_pair_limit_samples_rows(tmp_path):
    assert main(["pair", "--p", "0.85", "--horizon", "20000", "--replicas", "2000", "--seed", "5", "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "limit_samples.csv")) == 2000
    manifest = read_manifest(tmp_path / "manifest.json")
    assert manifest["extra"]["regime"] == "superdiffusive"
    assert main(["pair", "--p", "0.5", "--horizon", "200", "--replicas", "20", "--seed", "5", "--out", str(tmp_path / "d")]) == 0
    assert not (tmp_path / "d" / "limit_samples.csv").exists()


def test_last_meeting_medians_follow_regime(tmp_path):
    medians = {}
    for p in ("0.5", "0.85"):
        out = tmp_path / p
        assert main(["pair", "--p", p, "--horizon", "100000", "--replicas", "300", "--seed", "9", "--out", str(out)]) == 0
        medians[p] = np.median([int(r["last_meeting"]) for r in _rows(out / "pairs.csv")])
    assert medians["0.5"] > 10 * medians["0.85"]


def test_replay_pair_byte_identical(tmp_path, capsys):
    argv = ["pair", "--p", "0.7", "--horizon", "3000", "--replicas", "200", "--seed", "4", "--format", "jsonl", "--checkpoints", "10,500,3000"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    capsys.readouterr()
    assert main(["replay", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == 0
    out = capsys.readouterr().out
    assert "MISMATCH" not in out and "identical pairs.jsonl" in out


def test_replay_detects_tampering(tmp_path):
    assert main(["oracle", "--p", "0.6", "--n", "20", "--out", str(tmp_path / "a")]) == 0
    manifest = read_manifest(tmp_path / "a" / "manifest.json")
    manifest["outputs"]["pmf.csv"] = "0" * 64
    (tmp_path / "a" / "manifest.json").write_text(json.dumps(manifest))
    assert main(["replay", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == 2


def test_check_oracle_suite_passes_quickly(capsys):
    t0 = time.perf_counter()
    code = main(["check", "--suite", "oracle"])
    elapsed = time.perf_counter() - t0
    print(capsys.readouterr().out)
    assert elapsed < 10
    assert code == 0


def test_check_clt_passes(tmp_path, capsys):
    assert main(["check", "--suite", "clt", "--seed", "7", "--out", str(tmp_path)]) == 0
    assert "FAIL" not in capsys.readouterr().out
    assert len(_rows(tmp_path / "checks.csv")) >= 4


def test_check_low_replicas_flags_precision(capsys):
    assert main(["check", "--suite", "clt", "--replicas", "10"]) == 2
    assert "insufficient precision" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "erwlab", "oracle", "--p", "0.5", "--n", "4", "--what", "moments", "--out", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert "second_moment=4" in proc.stdout
