import csv
import json
import subprocess
import sys

import pytest

from reducible_bbm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--beta", "3", "--sigma2", "0.5")
    rec = json.loads(out)
    assert code == 0 and rec["region"] == "III"
    assert rec["boundary_distance"] == pytest.approx(0.1)
    code, out, _ = run(capsys, "classify", "--beta", "1", "--sigma2", "1")
    assert code == 0 and json.loads(out)["region"] == "Boundary"
    code, _, err = run(capsys, "classify", "--beta", "-1", "--sigma2", "1")
    assert code == 2 and "beta" in err


def test_rate(capsys):
    code, out, _ = run(capsys, "rate", "--beta", "3", "--sigma2", "0.5", "--theta", "1.2")
    rec = json.loads(out)
    assert code == 0 and rec["regime"] == "interior"
    assert rec["A"] == pytest.approx(-1) and rec["u_star"] == pytest.approx(0.5)
    assert rec["discrepancy"]["interior_literal_form"] == pytest.approx(19.1421356, abs=1e-6)
    assert rec["strategy"]["beta0"] == pytest.approx(0.5)
    code, out, _ = run(capsys, "rate", "--beta", "1", "--sigma2", "2", "--theta", "1.5")
    rec = json.loads(out)
    assert code == 0 and rec["A"] == pytest.approx(-1.25) and rec["regime"] == "switch_at_end"
    assert "discrepancy" not in rec
    assert run(capsys, "rate", "--beta", "1", "--sigma2", "1", "--theta", "1.5")[0] == 3
    assert run(capsys, "rate", "--beta", "1", "--sigma2", "2", "--theta", "1")[0] == 2
    assert run(capsys, "rate", "--beta", "1", "--sigma2", "2")[0] == 2


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--beta-range", "3", "3", "1", "--sigma2-range", "0.5", "0.5", "1",
                     "--theta-range", "1.1", "1.3", "3", "--output", str(out))
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["beta", "sigma2", "alpha", "theta", "region", "regime", "A", "u_star",
                             "x0", "beta0", "numeric_check", "abs_gap"]
    a = [float(r["A"]) for r in rows]
    assert len(a) == 3 and a[0] > a[1] > a[2]


def test_sweep_boundary_rows_and_json(capsys):
    code, out, _ = run(capsys, "sweep", "--beta-range", "0.5", "1.5", "3", "--sigma2-range", "1", "1", "1",
                       "--theta-range", "1.5", "1.5", "1", "--output", "-", "--format", "json")
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and "meta" in lines[0]
    rows = lines[1:]
    assert [r["region"] for r in rows] == ["II", "Boundary", "I"]
    assert rows[1]["A"] is None
    code, out, _ = run(capsys, "sweep", "--beta-range", "0.5", "1.5", "3", "--sigma2-range", "1", "1", "1",
                       "--theta-range", "1.5", "1.5", "1", "--output", "-")
    assert code == 0 and out.splitlines()[2].split(",")[6] == ""


def test_sweep_single_point_and_unwritable(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--beta-range", "1", "1", "1", "--sigma2-range", "2", "2", "1",
                       "--theta-range", "1.5", "1.5", "1", "--output", "-")
    assert code == 0 and len(out.splitlines()) == 2
    code, _, _ = run(capsys, "sweep", "--beta-range", "1", "1", "1", "--sigma2-range", "2", "2", "1",
                     "--theta-range", "1.5", "1.5", "1", "--output", str(tmp_path / "missing" / "x.csv"))
    assert code == 4
    code, _, _ = run(capsys, "sweep", "--beta-range", "2", "1", "3", "--sigma2-range", "2", "2", "1",
                     "--theta-range", "1.5", "1.5", "1", "--output", "-")
    assert code == 2


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--beta", "1", "--sigma2", "2", "--alpha", "1", "--t", "0",
                       "--runs", "3", "--seed", "7")
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and len(lines) == 5
    assert all(r["m_global"] == 0 for r in lines[1:4])
    assert lines[-1]["summary"]["completed"] == 3
    code, out2, _ = run(capsys, "simulate", "--beta", "1", "--sigma2", "2", "--alpha", "1", "--t", "0",
                        "--runs", "3", "--seed", "7")
    assert out2 == out
    assert run(capsys, "simulate", "--beta", "1", "--sigma2", "2", "--t", "1", "--runs", "3")[0] == 2


def test_simulate_threshold_summary(capsys):
    code, out, _ = run(capsys, "simulate", "--beta", "1", "--sigma2", "2", "--t", "2", "--runs", "500",
                       "--seed", "3", "--threshold", "2.0", "--levels", "0", "1")
    lines = out.splitlines()
    summary = json.loads(lines[-1])["summary"]
    hits = sum(json.loads(x)["m_global"] >= 2.0 for x in lines[1:-1])
    assert code == 0 and summary["n_hits"] == hits and summary["n_runs"] == 500
    assert summary["ci_low"] <= summary["p_hat"] <= summary["ci_high"]
    assert len(json.loads(lines[1])["levels"]) == 2


def test_simulate_overflow(capsys):
    code, out, _ = run(capsys, "simulate", "--beta", "1", "--sigma2", "2", "--t", "8", "--runs", "3",
                       "--seed", "3", "--max-population", "20")
    summary = json.loads(out.splitlines()[-1])["summary"]
    assert code == 5 and summary["error"] == "population_overflow" and summary["completed"] == 0


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"beta": 3, "sigma2": 0.5, "theta": 1.2}))
    code, out, _ = run(capsys, "rate", "--config", str(cfg))
    assert code == 0 and json.loads(out)["A"] == pytest.approx(-1)
    code, out, _ = run(capsys, "rate", "--config", str(cfg), "--theta", "1.1", "--pretty")
    assert code == 0 and json.loads(out)["A"] == pytest.approx(-0.5) and "\n  " in out
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "rate", "--config", str(cfg))[0] == 2


def test_validate_consistency_reports_every_check(capsys):
    code, out, _ = run(capsys, "validate", "--suite", "consistency")
    lines = [json.loads(x) for x in out.splitlines()]
    summary = lines[-1]
    assert summary["suite"] == "consistency" and summary["checks"] == len(lines) - 1
    assert code == (0 if summary["pass"] else 1)
    assert set(summary["failed"]) == {r["check"] for r in lines[:-1] if not r["pass"]}


def test_validate_moments_and_bad_suite(capsys):
    code, out, _ = run(capsys, "validate", "--suite", "moments", "--runs", "2000", "--seed", "42")
    rows = [json.loads(x) for x in out.splitlines()[:-1]]
    assert [r["check"] for r in rows] == ["moment_type1", "moment_type2"]
    assert code == 0 and all(abs(r["z"]) <= 3 for r in rows)
    with pytest.raises(SystemExit) as info:
        main(["validate", "--suite", "nope"])
    assert info.value.code == 2
    assert run(capsys, "validate", "--suite", "moments")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "reducible_bbm", "classify", "--beta", "1", "--sigma2", "2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout) == {"region": "I", "boundary_distance": 1.0}
