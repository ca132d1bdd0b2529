import hashlib
import os

import numpy as np
import pytest
from click.testing import CliRunner

from gridrisk.cli import main
from gridrisk.store import RunStore, read_raster


@pytest.fixture()
def runner():
    return CliRunner()


def _tiny_cfg(data_dir, tmp_path, **extra):
    """A 2-realization single-variant copy of the demo CP config."""
    src = os.path.join(data_dir, "configs", "cp.cfg")
    lines = []
    drop = {"variants", "n_realizations", "workers"} | set(extra)
    for line in open(src):
        key = line.split("=")[0].strip()
        if key in drop:
            continue
        lines.append(line)
    lines.append("variants = K\n")
    lines.append("n_realizations = 2\n")
    lines.append("workers = 2\n")
    for k, v in extra.items():
        lines.append(f"{k} = {v}\n")
    dst = tmp_path / "tiny.cfg"
    # paths in the demo config are relative to its directory
    base = os.path.dirname(src)
    fixed = []
    for line in lines:
        key, _, value = line.partition("=")
        value = value.strip()
        if value.startswith("../"):
            value = ",".join(os.path.join(base, v.strip()) for v in value.split(","))
            line = f"{key.strip()} = {value}\n"
        fixed.append(line)
    dst.write_text("".join(fixed))
    return str(dst)


def test_synth_data_and_determinism(runner, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        res = runner.invoke(main, ["synth-data", "--out", str(out), "--seed", "99"])
        assert res.exit_code == 0, res.output
    # regeneration with the same seed is byte-identical
    for root, _, files in os.walk(a):
        rel = os.path.relpath(root, a)
        for f in files:
            pa = os.path.join(root, f)
            pb = os.path.join(b, rel, f)
            assert open(pa, "rb").read() == open(pb, "rb").read(), pa


def test_run_and_repeat_checksum(runner, data_dir, tmp_path):
    cfg = _tiny_cfg(data_dir, tmp_path)
    # same run basename so the manifests carry identical run ids
    out1, out2 = tmp_path / "a" / "run", tmp_path / "b" / "run"
    for out in (out1, out2):
        res = runner.invoke(main, ["run", "--config", cfg, "--out", str(out)])
        assert res.exit_code == 0, res.stderr
        assert os.path.exists(out / "manifest.txt")
    # identical (config, seed) -> identical manifest checksums
    assert (RunStore.open(out1).manifest_checksum()
            == RunStore.open(out2).manifest_checksum())


def test_run_missing_config_exits_2(runner, tmp_path):
    res = runner.invoke(main, ["run", "--config", str(tmp_path / "no.cfg"),
                               "--out", str(tmp_path / "r")])
    assert res.exit_code == 2


def test_run_bad_scenario_exits_2(runner, data_dir, tmp_path):
    # scenario id that has no matching emissions pathway in the file
    cfg = _tiny_cfg(data_dir, tmp_path)
    res = runner.invoke(main, ["run", "--config", cfg, "--scenario", "XX",
                               "--out", str(tmp_path / "r")])
    assert res.exit_code == 2


def test_run_unknown_flag_rejected(runner):
    res = runner.invoke(main, ["run", "--frobnicate", "1"])
    assert res.exit_code != 0


def test_report_pv_csv(runner, cp_store, b2_store):
    res = runner.invoke(main, ["report", "--run", cp_store.path,
                               "--run", b2_store.path, "--metric", "pv"])
    assert res.exit_code == 0, res.stderr
    lines = res.stdout.strip().split("\n")
    assert lines[0].startswith("scenario,")
    assert [l.split(",")[0] for l in lines[1:]] == ["CP", "B2", "AL"]


def test_report_rolling_window(runner, cp_store):
    res = runner.invoke(main, ["report", "--run", cp_store.path,
                               "--metric", "rolling", "--window", "5",
                               "--variant", "KU"])
    assert res.exit_code == 0, res.stderr
    lines = res.stdout.strip().split("\n")
    assert lines[0] == "start_year,CP_pv"
    assert lines[1].split(",")[0] == "2010"
    assert len(lines) == 1 + (91 - 5 + 1)


def test_report_risk_ratio_base_year_is_one(runner, cp_store):
    res = runner.invoke(main, ["report", "--run", cp_store.path,
                               "--metric", "risk-ratio", "--variant", "KU"])
    assert res.exit_code == 0, res.stderr
    rows = dict(l.split(",") for l in res.stdout.strip().split("\n")[1:])
    assert float(rows["2024"]) == 1.0


def test_report_unknown_metric_rejected(runner, cp_store):
    res = runner.invoke(main, ["report", "--run", cp_store.path,
                               "--metric", "bogus"])
    assert res.exit_code == 2


def test_risk_index_exports_four_maps(runner, data_dir, cp_store, tmp_path):
    th = os.path.join(data_dir, "thresholds", "default.csv")
    out = tmp_path / "maps"
    res = runner.invoke(main, ["risk-index", "--run", cp_store.path,
                               "--thresholds", th, "--out", str(out)])
    assert res.exit_code == 0, res.stderr
    files = sorted(os.listdir(out))
    assert files == ["risk_high_dates.grdx", "risk_high_prob.grdx",
                     "risk_moderate_dates.grdx", "risk_moderate_prob.grdx"]
    m = read_raster(out / "risk_moderate_dates.grdx")
    assert m["variable"] == "moderate_dates"
    assert len(m["values"]) == 2496


def test_risk_index_bad_k_ordering_exits_2(runner, data_dir, cp_store, tmp_path):
    th = os.path.join(data_dir, "thresholds", "default.csv")
    res = runner.invoke(main, ["risk-index", "--run", cp_store.path,
                               "--thresholds", th, "--k-moderate", "3",
                               "--k-high", "2", "--out", str(tmp_path / "m")])
    assert res.exit_code == 2


def test_risk_index_single_threshold_marginal_map(runner, cp_store, tmp_path):
    th = tmp_path / "one.csv"
    th.write_text("dt,>=,2.0,21\nk_moderate=1\nk_high=1\n")
    out = tmp_path / "maps"
    res = runner.invoke(main, ["risk-index", "--run", cp_store.path,
                               "--thresholds", str(th), "--out", str(out)])
    assert res.exit_code == 0, res.stderr
    mod = read_raster(out / "risk_moderate_dates.grdx")
    high = read_raster(out / "risk_high_dates.grdx")
    assert np.array_equal(mod["values"], high["values"])


def test_map_export(runner, cp_store, tmp_path):
    out = tmp_path / "dt.grdx"
    res = runner.invoke(main, ["map-export", "--run", cp_store.path,
                               "--variable", "dt", "--year", "2090",
                               "--quantile", "50", "--out", str(out)])
    assert res.exit_code == 0, res.stderr
    m = read_raster(out)
    assert m["year_start"] == 2090
    assert np.all(np.isfinite(m["values"]))


def test_map_export_bad_year_exits_2(runner, cp_store, tmp_path):
    res = runner.invoke(main, ["map-export", "--run", cp_store.path,
                               "--variable", "dt", "--year", "2200",
                               "--out", str(tmp_path / "x.grdx")])
    assert res.exit_code == 2


def test_stdout_carries_data_only(runner, cp_store, tmp_path):
    out = tmp_path / "pv.csv"
    res = runner.invoke(main, ["report", "--run", cp_store.path,
                               "--metric", "pv", "--out", str(out)])
    assert res.exit_code == 0
    assert res.stdout == ""           # data went to the file
    assert "wrote" in res.stderr      # diagnostics on stderr
    assert out.read_text().startswith("scenario,")
