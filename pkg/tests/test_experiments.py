import json

import pytest

from stpuf import experiments
from stpuf.experiments import run_experiment


@pytest.mark.parametrize("name", experiments.EXPERIMENTS)
def test_experiment_writes_files(name, small_cfg, tmp_path):
    paths = run_experiment(name, small_cfg, tmp_path / name)
    assert paths
    for p in paths:
        assert p.exists() and p.stat().st_size > 0
    suffixes = {p.suffix for p in paths}
    assert ".json" in suffixes


def test_unknown_experiment_rejected(small_cfg, tmp_path):
    with pytest.raises(ValueError, match="unknown experiment"):
        run_experiment("fig99", small_cfg, tmp_path)


@pytest.mark.parametrize("name", ["fig1", "fig4a", "fig6e"])
def test_rerun_is_bit_identical(name, small_cfg, tmp_path):
    first = run_experiment(name, small_cfg, tmp_path / "r1")
    second = run_experiment(name, small_cfg, tmp_path / "r2")
    assert [p.name for p in first] == [p.name for p in second]
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes(), a.name


def test_fig4_summary_round_trips_from_csv(small_cfg, tmp_path):
    paths = run_experiment("fig4b", small_cfg, tmp_path, figures=False)
    csv_path = next(p for p in paths if p.name.endswith("readings.csv"))
    json_path = next(p for p in paths if p.name.endswith("summary.json"))
    meta, columns, rows = experiments.read_csv(csv_path)
    summary = json.loads(json_path.read_text())
    assert meta["config_hash"] == small_cfg.hash()
    assert meta["seed"] == str(small_cfg.master_seed)
    i_usage = columns.index("usage_s")
    i_class = columns.index("classified")
    for usage_s, rate in summary["error_rates"].items():
        usage_rows = [r for r in rows if float(r[i_usage]) == float(usage_s)]
        missed = sum(1 for r in usage_rows if r[i_class] == "0")
        assert missed / len(usage_rows) == rate


def test_fig1_summary_reflects_calibration(small_cfg, tmp_path):
    paths = run_experiment("fig1", small_cfg, tmp_path, figures=False)
    summary = json.loads(
        next(p for p in paths if p.name == "fig1_summary.json").read_text()
    )
    assert summary["postcal_all_nonnegative"] is True
    assert summary["postcal_std_s"] < summary["precal_std_s"]


def test_figures_toggle(small_cfg, tmp_path):
    with_figs = run_experiment("fig2b", small_cfg, tmp_path / "f1", figures=True)
    without = run_experiment("fig2b", small_cfg, tmp_path / "f2", figures=False)
    assert any(p.suffix == ".png" for p in with_figs)
    assert not any(p.suffix == ".png" for p in without)


def test_config_hash_tracks_constants(small_cfg, small_doc, tmp_path):
    import copy

    from stpuf import config as config_mod

    changed_doc = copy.deepcopy(small_doc)
    changed_doc["aging"]["bti_prefactor_v"] *= 2
    changed = config_mod.parse_config(changed_doc)
    p1 = run_experiment("fig2b", small_cfg, tmp_path / "a", figures=False)
    p2 = run_experiment("fig2b", changed, tmp_path / "b", figures=False)
    m1, _, _ = experiments.read_csv(p1[0])
    m2, _, _ = experiments.read_csv(p2[0])
    assert m1["config_hash"] != m2["config_hash"]
