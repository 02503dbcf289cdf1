from __future__ import annotations

import csv
import io
import json

import pytest

from royaltylab import verify
from royaltylab.cli import UsageError, main, read_config


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_solve_risk_example():
    code, out, _ = run("solve-risk", "--mu", "1", "--sigma", "1", "--cost", "0", "--eta-s", "2", "--eta-c", "1")
    assert code == 0
    vals = kv(out)
    assert vals["r"].startswith("0.666")
    assert vals["objective"].startswith("0.333")
    assert vals["regime"] == "TradeOnlyWithRoyalties"


def test_solve_asym_example():
    code, out, _ = run("solve-asym", "--dist", "exp", "--lambda", "1")
    vals = kv(out)
    assert code == 0
    assert float(vals["objective"]) == pytest.approx(1.0)
    assert vals["baseline"] == "0.367879"
    assert vals["gain-pct"] == "171.8"


def test_solve_collection_example():
    code, out, _ = run("solve-collection", "--dist", "exp", "--lambda", "1")
    vals = kv(out)
    assert code == 0
    assert float(vals["objective"]) == pytest.approx(2.0)
    assert vals["baseline"] == "1.57468"
    assert vals["gain-pct"] == "27.0"


def test_json_schema(tmp_path):
    path = tmp_path / "risk.json"
    code, _, _ = run("solve-risk", "--mu", "1", "--sigma", "1", "--eta-s", "2", "--eta-c", "1",
                     "--out", str(path))
    assert code == 0
    rec = json.loads(path.read_text())
    assert list(rec) == ["timestamp", "subcommand", "toolVersion", "seed", "config", "results"]
    res = rec["results"]
    for k in ("objective", "baselineNoRoyalty", "delta"):
        assert k in res
    assert res["policy"]["p0"] == pytest.approx(1 / 9)
    assert res["policy"]["r"] == pytest.approx(2 / 3)


def test_csv_sweep_header(tmp_path):
    path = tmp_path / "risk.csv"
    code, _, _ = run("sweep", "--target", "RegionRisk", "--axis1", "mu:0:3:20", "--axis2", "sigma:0:3:20",
                     "--format", "csv", "--out", str(path))
    assert code == 0
    raw = path.read_bytes()
    assert raw.startswith(b"mu,sigma,u_with,u_without,region\n")
    assert b"\r\n" not in raw
    rows = list(csv.reader(io.StringIO(raw.decode("utf-8"))))
    assert len(rows) == 1 + 400
    assert any(r[4] == "TradeOnlyWithRoyalties" for r in rows[1:])


def test_same_config_gives_identical_files(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["simulate", "--scenario", "InfoAsym", "--dist", "exp", "--lambda", "1", "--p0", "0.5", "--r", "0.4",
            "--trials", "20000", "--seed", "3"]
    assert run(*argv, "--out", str(a))[0] == 0
    assert run(*argv, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_files_identical_without_epoch(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--target", "RegionAsym", "--axis1", "lambda:0.5:2:6", "--axis2", "c:0.1:1:6",
            "--format", "csv"]
    run(*argv, "--out", str(a))
    run(*argv, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# exponential market\ndist = exp\nlambda = 2\ncost = 0.1  # per unit\n")
    code, out, _ = run("solve-asym", "--config", str(cfg))
    assert code == 0
    assert float(kv(out)["objective"]) == pytest.approx(0.4)
    code, out, _ = run("solve-asym", "--config", str(cfg), "--lambda", "1")
    assert float(kv(out)["objective"]) == pytest.approx(0.9)


def test_config_round_trip(tmp_path):
    path = tmp_path / "rec.json"
    run("solve-collection", "--dist", "uniform", "--a", "0", "--b", "2", "--out", str(path))
    rec = json.loads(path.read_text())
    cfg = tmp_path / "echo.cfg"
    lines = [f"{k} = {v}" for k, v in rec["config"].items()
             if v is not None and k not in ("command", "lam", "format", "differing_views")]
    cfg.write_text("\n".join(lines) + "\n")
    again = tmp_path / "again.json"
    assert run("solve-collection", "--config", str(cfg), "--out", str(again))[0] == 0
    assert json.loads(again.read_text())["results"] == rec["results"]


def test_differing_views_flag_in_config(tmp_path):
    cfg = tmp_path / "dv.cfg"
    cfg.write_text("differing_views = true\nmu_c = 1\nsigma_c = 1\nmu_s = 1\nsigma_s = 1\neta_s = 1\neta_c = 1\n")
    code, out, _ = run("solve-risk", "--config", str(cfg))
    assert code == 0
    assert float(kv(out)["r"]) == pytest.approx(0.5)


def test_read_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("dist exp\n")
    with pytest.raises(UsageError):
        read_config(str(bad))
    assert run("solve-asym", "--config", str(tmp_path / "missing.cfg"))[0] == 1


def test_seed_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("ROYALTYLAB_SEED", "17")
    path = tmp_path / "s.json"
    argv = ["simulate", "--scenario", "Benchmark", "--dist", "exp", "--lambda", "1", "--p0", "1", "--trials", "5000"]
    run(*argv, "--out", str(path))
    assert json.loads(path.read_text())["seed"] == 17
    _, env_out, _ = run(*argv)
    _, flag_out, _ = run(*argv, "--seed", "17")
    assert env_out == flag_out
    monkeypatch.setenv("ROYALTYLAB_SEED", "abc")
    code, _, err = run(*argv)
    assert code == 1 and "ROYALTYLAB_SEED" in err


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["solve-asym"],
    ["solve-asym", "--dist", "exp"],
    ["solve-asym", "--dist", "exp", "--lambda", "-1"],
    ["solve-benchmark", "--dist", "uniform", "--a", "2", "--b", "1"],
    ["simulate", "--scenario", "Benchmark", "--dist", "exp", "--lambda", "1"],
    ["sweep", "--target", "RegionRisk", "--axis1", "mu:0:3"],
    ["sweep", "--target", "RegionRisk", "--axis1", "lambda:0:3:10"],
    ["solve-asym", "--dist", "exp", "--lambda", "1", "--seed", "-3"],
])
def test_usage_errors_exit_one(argv):
    code, out, err = run(*argv)
    assert code == 1
    assert err


def test_unwritable_output(tmp_path):
    code, _, err = run("solve-asym", "--dist", "exp", "--lambda", "1", "--out", str(tmp_path / "nodir" / "x.json"))
    assert code == 1
    assert "nodir" in err


def test_verify_exit_codes(monkeypatch):
    monkeypatch.setattr(verify, "CHECKS", [("ok", lambda: (True, "fine"))])
    assert run("verify")[0] == 0
    monkeypatch.setattr(verify, "CHECKS", [("ok", lambda: (True, "")), ("broken", lambda: (False, "nope"))])
    code, out, _ = run("verify")
    assert code == 2
    assert "FAIL broken" in out


def test_verify_full_suite():
    code, out, _ = run("verify")
    assert code == 0, out
    assert "FAIL" not in out
