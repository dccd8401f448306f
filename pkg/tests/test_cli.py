import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from thermolag.cli import main
from thermolag.report import FIGURE_COLUMNS

FIXTURE = Path(__file__).parent / "fixtures" / "synthetic_2y.csv"
N_STRATA = 6


def read_csv(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text())))


@pytest.fixture(scope="module")
def fitted(tmp_path_factory):
    out = tmp_path_factory.mktemp("fit") / "results.json"
    assert main(["fit", "--input", str(FIXTURE), "--panel", "all", "--variant", "both", "--out", str(out)]) == 0
    return out


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "thermolag"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr and proc.stdout == ""


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["fit", "--input", "x.csv"],
    ["--threads", "0", "detect", "--input", str(FIXTURE)],
    ["detect", "--input", str(FIXTURE), "--definitions", "HW_95P"],
])
def test_usage_errors(argv, tmp_path):
    assert main(argv) == 1


def test_data_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,temp_mean,rh,pm10,holiday,deaths_CVD_all\n2006-01-01,20,80,30,0,-1\n")
    assert main(["detect", "--input", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert "NegativeCount" in capsys.readouterr().err
    assert main(["detect", "--input", str(tmp_path / "missing.csv")]) == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert main(["report", "--input", str(junk), "--out-dir", str(tmp_path)]) == 2


def test_detect_summary(tmp_path):
    assert main(["detect", "--input", str(FIXTURE), "--out-dir", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "summary.csv")
    assert len(rows) == 21
    assert rows[0]["name"] == "HW_90P_2d" and rows[-1]["name"] == "CS_10P_4d"
    flags = read_csv(tmp_path / "HW_95P_3d.csv")
    assert len(flags) == 730 and set(r["flag"] for r in flags) <= {"0", "1"}
    manifest = json.loads((tmp_path / "summary.csv.manifest.json").read_text())
    assert "summary.csv" in manifest["outputs"] and manifest["input_digest"].startswith("sha256:")


def test_fit_row_count(fitted):
    rows = read_csv(fitted.with_suffix(".csv"))
    assert len(rows) == 21 * N_STRATA * 2
    doc = json.loads(fitted.read_text())
    assert len(doc["cells"]) == len(rows)
    assert "lag_window" in doc["notes"]
    ok = [r for r in rows if not r["error"]]
    assert ok and all(float(r["ci_low"]) <= float(r["rr"]) <= float(r["ci_high"]) for r in ok)
    assert all(r["rr"] == "" for r in rows if r["error"])


def test_report_projection_round_trip(fitted, tmp_path):
    assert main(["report", "--input", str(fitted), "--out-dir", str(tmp_path)]) == 0
    flat = read_csv(fitted.with_suffix(".csv"))
    expected = {
        "fig2_overall.csv": lambda r: r["definition"].startswith("HW") and r["variant"] == "overall",
        "fig2_added.csv": lambda r: r["definition"].startswith("HW") and r["variant"] == "added",
        "fig3_overall.csv": lambda r: r["definition"].startswith("CS") and r["variant"] == "overall",
        "fig3_added.csv": lambda r: r["definition"].startswith("CS") and r["variant"] == "added",
        "fig4.csv": lambda r: r["cause"] in ("CVD", "RESP") and r["sex"] in ("female", "male"),
    }
    for name, pred in expected.items():
        got = read_csv(tmp_path / name)
        want = [{k: r[k] for k in FIGURE_COLUMNS} for r in flat if pred(r)]
        assert got == want, name


def test_fig4_restricted(fitted, tmp_path):
    main(["report", "--input", str(fitted), "--out-dir", str(tmp_path)])
    rows = read_csv(tmp_path / "fig4.csv")
    assert {(r["cause"], r["sex"]) for r in rows} == {
        ("CVD", "female"), ("CVD", "male"), ("RESP", "female"), ("RESP", "male")}
    assert len(rows) == 21 * 4 * 2


def test_report_empty_results(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"manifest": {}, "cells": []}))
    assert main(["report", "--input", str(empty), "--out-dir", str(tmp_path)]) == 0
    for name in ("fig2_overall.csv", "fig2_added.csv", "fig3_overall.csv", "fig3_added.csv", "fig4.csv"):
        assert (tmp_path / name).read_text() == ",".join(FIGURE_COLUMNS) + "\n"


@pytest.mark.parametrize("doc", [
    {"cells": "nope"},
    {"cells": [{"definition": "HW_95P_3d"}]},
    {"cells": [dict.fromkeys(FIGURE_COLUMNS, "x")]},
])
def test_report_malformed(doc, tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["report", "--input", str(path), "--out-dir", str(tmp_path)]) == 2
    assert "MalformedResults" in capsys.readouterr().err


def test_fit_config_and_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"df_rh": 3, "hw_max_lag": 7, "hw_lag_df": 3, "lag_knots": "linear"}))
    out = tmp_path / "r.json"
    argv = ["fit", "--input", str(FIXTURE), "--panel", "hw", "--causes", "CVD", "--sexes", "all",
            "--config", str(cfg), "--lag-knots", "log", "--out", str(out)]
    assert main(argv) == 0
    cells = json.loads(out.read_text())["cells"]
    assert len(cells) == 12
    assert {(c["df_rh"], c["max_lag"], c["lag_df"], c["lag_knots"]) for c in cells} == {(3, 7, 3, "log")}


def test_fit_byte_identical_across_threads(tmp_path):
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"t{threads}" / "results.json"
        argv = ["--threads", threads, "fit", "--input", str(FIXTURE), "--panel", "all", "--out", str(out)]
        assert main(argv) == 0
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()
    assert outs[0].with_suffix(".csv").read_bytes() == outs[1].with_suffix(".csv").read_bytes()


def test_simulate_deterministic(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--out", str(a), "--seed", "3", "--years", "1"]) == 0
    assert main(["simulate", "--out", str(b), "--seed", "3", "--years", "1"]) == 0
    assert a.read_bytes() == b.read_bytes()
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["created_utc"] == "1970-01-01T00:00:00Z"
    assert manifest["simulation"]["rng"] == "numpy.random.PCG64"


def test_simulate_bad_spec(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"years": 0}))
    assert main(["simulate", "--spec", str(spec), "--out", str(tmp_path / "o.csv")]) == 2


def test_sensitivity_subcommand(tmp_path):
    base = tmp_path / "base.json"
    grid = {"df_rh_range": [2], "df_pm10_range": [2], "lag_df_range": [3, 4], "max_lag_heat": [10],
            "max_lag_cold": [27], "df_trend_range": [2], "df_dos_range": [1, 2]}
    base.write_text(json.dumps({"definition": "HW_95P_3d", "cause": "CVD", "sex": "all", "grid": grid}))
    out = tmp_path / "grid.csv"
    assert main(["sensitivity", "--input", str(FIXTURE), "--config", str(base), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 4
    assert [r["rank"] for r in rows] == ["1", "2", "3", "4"]
    assert sum(r["is_base"] == "1" for r in rows) == 1
    qaics = [float(r["qaic"]) for r in rows]
    assert qaics == sorted(qaics)
    manifest = json.loads((tmp_path / "grid.csv.manifest.json").read_text())
    assert manifest["common_phi"] > 0


def test_sensitivity_needs_definition(tmp_path):
    base = tmp_path / "base.json"
    base.write_text("{}")
    assert main(["sensitivity", "--input", str(FIXTURE), "--config", str(base), "--out", str(tmp_path / "g.csv")]) == 1
