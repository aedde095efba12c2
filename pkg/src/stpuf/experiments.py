"""Named experiment pipelines reproducing the reported distributions.

Each experiment writes CSV data (with a header line embedding the config
hash and master seed), a JSON summary, and, when figures are enabled, PNG
renderings alongside. Outputs are bit-identical across reruns of the same
config.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from stpuf import arbiter, devices, nist, plotting, sensor, sram
from stpuf.config import ExperimentConfig
from stpuf.population import sample_population
from stpuf.sensor import RecyclingSensor, ro_delay

EXPERIMENTS = ("fig1", "fig2b", "fig4a", "fig4b", "fig4c", "fig5", "fig6e", "nist")

_FIG4_VARIANTS = {"fig4a": "inv-cal", "fig4b": "inv-hv-cal", "fig4c": "st-hv-cal-boost"}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    path: Path, config: ExperimentConfig, columns: Sequence[str], rows
) -> Path:
    lines = [f"# config_hash={config.hash()} seed={config.master_seed}\n"]
    lines.append(",".join(columns) + "\n")
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row) + "\n")
    path.write_text("".join(lines), encoding="utf-8")
    return path


def write_json(path: Path, config: ExperimentConfig, payload: dict) -> Path:
    doc = {"config_hash": config.hash(), "seed": config.master_seed, **payload}
    path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def read_csv(path: Path) -> tuple[dict, list[str], list[list[str]]]:
    """Read back a CSV written by write_csv (header meta, columns, rows)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    meta = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
    columns = lines[1].split(",")
    return meta, columns, [line.split(",") for line in lines[2:]]


def _histogram_rows(values: Sequence[float], bins: int = 60):
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(len(counts))
    ]


def run_fig1(config: ExperimentConfig, out_dir: Path, figures: bool) -> list[Path]:
    """Delay-difference distribution before and after self-calibration."""
    sc = config.sensor_config("inv-cal")
    chips = sample_population(config.variation, sensor.sensor_manifest(sc))
    pre, post = [], []
    env = sc.sense_rails
    for chip in chips:
        s = RecyclingSensor(sc, config.device, config.aging, chip)
        pre.append(ro_delay(s.reference, env) - ro_delay(s.stressed, env))
        s.calibrate()
        post.append(ro_delay(s.reference, env) - ro_delay(s.stressed, env))
    paths = [
        write_csv(
            out_dir / "fig1_delay_differences.csv", config,
            ("chip_id", "precal_diff_s", "postcal_diff_s"),
            [(c.chip_id, a, b) for c, a, b in zip(chips, pre, post)],
        ),
        write_csv(
            out_dir / "fig1_precal_hist.csv", config,
            ("bin_left_s", "bin_right_s", "count"), _histogram_rows(pre),
        ),
        write_csv(
            out_dir / "fig1_postcal_hist.csv", config,
            ("bin_left_s", "bin_right_s", "count"), _histogram_rows(post),
        ),
        write_json(
            out_dir / "fig1_summary.json", config,
            {
                "chips": len(chips),
                "precal_std_s": float(np.std(np.abs(pre))),
                "postcal_std_s": float(np.std(post)),
                "postcal_min_s": min(post),
                "postcal_all_nonnegative": bool(min(post) >= 0.0),
            },
        ),
    ]
    if figures:
        paths.append(
            plotting.save_histogram(
                out_dir / "fig1_calibration.png",
                [("pre-calibration", pre), ("post-calibration", post)],
                xlabel="fresh minus stressed RO delay (s)",
                title="Self-calibration tightens the delay difference",
            )
        )
    return paths


def run_fig2b(config: ExperimentConfig, out_dir: Path, figures: bool) -> list[Path]:
    """ST vs inverter delay sensitivity over the documented V_TH sweep."""
    env = config.sensor.sense_rails
    consts = config.device
    grid = [consts.delta_vth_sweep_max * i / 49 for i in range(50)]
    inv0 = devices.gate_delay(devices.inverter(consts), env)
    st0 = devices.gate_delay(devices.schmitt_trigger(consts), env)
    rows = []
    for dv in grid:
        inv_r = devices.gate_delay(
            devices.inverter(consts, shifts=(dv, dv)), env) / inv0
        st_r = devices.gate_delay(
            devices.schmitt_trigger(consts, shifts=(dv,) * 6), env) / st0
        rows.append((dv, inv_r, st_r, st_r / inv_r))
    paths = [
        write_csv(
            out_dir / "fig2b_sensitivity.csv", config,
            ("delta_vth_v", "inv_delay_ratio", "st_delay_ratio", "sensitivity_ratio"),
            rows,
        ),
        write_json(
            out_dir / "fig2b_summary.json", config,
            {
                "sweep_max_v": consts.delta_vth_sweep_max,
                "endpoint_sensitivity": rows[-1][3],
            },
        ),
    ]
    if figures:
        paths.append(
            plotting.save_series(
                out_dir / "fig2b_sensitivity.png",
                [r[0] for r in rows],
                {
                    "inverter delay ratio": [r[1] for r in rows],
                    "ST delay ratio": [r[2] for r in rows],
                    "ST/inverter sensitivity": [r[3] for r in rows],
                },
                xlabel="added V_TH shift (V)",
                ylabel="ratio",
                title="ST delay sensitivity to threshold shifts",
            )
        )
    return paths


def run_fig4(
    config: ExperimentConfig, out_dir: Path, figures: bool, name: str
) -> list[Path]:
    """Detection error experiment for one sensor design variant."""
    variant = _FIG4_VARIANTS[name]
    sc = config.sensor_config(variant)
    chips = sample_population(config.variation, sensor.sensor_manifest(sc))
    usages = list(config.sensor.usages_s)
    table = sensor.detection_experiment(
        chips, sc, config.device, config.aging, usages, variant=variant
    )
    rows = [
        (r.chip_id, variant, r.usage_s, r.ref_ticks, r.stressed_ticks,
         r.tick_delta, r.classified)
        for r in table.rows
    ]
    hist_rows = [(0.0, d, c) for d, c in _count_hist(table.fresh_deltas)]
    for usage in usages:
        hist_rows.extend((usage, d, c) for d, c in _count_hist(table.deltas(usage)))
    paths = [
        write_csv(
            out_dir / f"{name}_readings.csv", config,
            ("chip_id", "design_variant", "usage_s", "ref_ticks",
             "stressed_ticks", "tick_delta", "classified"),
            rows,
        ),
        write_csv(
            out_dir / f"{name}_hist.csv", config,
            ("usage_s", "tick_delta", "count"), hist_rows,
        ),
        write_json(
            out_dir / f"{name}_summary.json", config,
            {
                "variant": variant,
                "threshold": table.threshold,
                "chips": len(chips),
                "error_rates": {str(u): table.error_rate(u) for u in usages},
            },
        ),
    ]
    if figures:
        datasets = [("fresh", table.fresh_deltas)] + [
            (f"{u:g} s", table.deltas(u)) for u in usages
        ]
        paths.append(
            plotting.save_histogram(
                out_dir / f"{name}_distributions.png",
                datasets,
                bins=50,
                xlabel="tick delta (reference - stressed)",
                title=f"{variant}: tick-delta distributions vs usage",
                log_y=True,
            )
        )
    return paths


def _count_hist(values: Sequence[int]) -> list[tuple[int, int]]:
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return sorted(counts.items())


def run_fig5(config: ExperimentConfig, out_dir: Path, figures: bool) -> list[Path]:
    """Raw delay-difference distributions for both PUF kinds and all sizes."""
    env = config.sensor.sense_rails
    stats: dict[str, dict] = {}
    paths = []
    per_kind_rows: dict[str, list] = {k: [] for k in (devices.INVERTER, devices.SCHMITT_TRIGGER)}
    spread: dict[str, list[float]] = {k: [] for k in per_kind_rows}
    hist4 = []
    for kind in per_kind_rows:
        for stages in config.arbiter.stage_counts:
            manifest = arbiter.arbiter_manifest(stages, kind)
            chips = sample_population(config.variation, manifest)
            pufs = [
                arbiter.build_puf(stages, kind, config.device, chip,
                                  setup_window=config.arbiter.setup_window)
                for chip in chips
            ]
            if stages <= 4:
                challenges = arbiter.all_challenges(stages)
            else:
                challenges = arbiter.sample_challenges(
                    stages, config.arbiter.delta_challenges, config.master_seed
                )
            dist = arbiter.delta_distribution(pufs, challenges, env)
            per_kind_rows[kind].extend(
                (stages, i, d) for i, d in enumerate(dist.samples)
            )
            spread[kind].append(dist.std)
            stats[f"{kind}_{stages}"] = {
                "mean_s": dist.mean,
                "std_s": dist.std,
                "fraction_positive": dist.fraction_positive,
                "samples": len(dist.samples),
            }
            if stages == 4:
                hist4.append((kind, dist.samples))
    for kind, rows in per_kind_rows.items():
        paths.append(
            write_csv(
                out_dir / f"fig5_deltas_{kind}.csv", config,
                ("stages", "sample_index", "raw_delta_s"), rows,
            )
        )
    paths.append(write_json(out_dir / "fig5_summary.json", config, {"stats": stats}))
    if figures:
        paths.append(
            plotting.save_histogram(
                out_dir / "fig5_delta_hist_4stage.png",
                hist4,
                xlabel="raw delay difference (s)",
                title="4-stage arbiter PUF delay-difference distribution",
            )
        )
        paths.append(
            plotting.save_series(
                out_dir / "fig5_spread.png",
                list(config.arbiter.stage_counts),
                {k: v for k, v in spread.items()},
                xlabel="stage count",
                ylabel="std of raw delta (s)",
                title="Delay-difference spread vs stage count",
            )
        )
    return paths


def _sram_arrays(config: ExperimentConfig) -> dict[str, list[sram.BitcellParams]]:
    s = config.sram
    return {
        sram.SIX_T: sram.build_array(sram.SIX_T, s.rows, s.cols, config.variation),
        sram.EIGHT_T: sram.build_array(
            sram.EIGHT_T, s.rows, s.cols, config.variation,
            latch_strength=s.latch_strength),
        sram.SEVEN_T_NV: sram.build_array(
            sram.SEVEN_T_NV, s.rows, s.cols, config.variation,
            mtj_strength=s.mtj_strength),
    }


def run_fig6e(config: ExperimentConfig, out_dir: Path, figures: bool) -> list[Path]:
    """Faults vs voltage for the 6T/8T/7T bitcell designs."""
    s = config.sram
    reports = sram.fault_sweep(
        _sram_arrays(config), s.vdd_grid, s.cycles, config.sram_noise,
        seed=config.master_seed,
    )
    by = {(r.vdd, r.kind): r for r in reports}
    ratios = {
        "ratio_6t_over_8t_at_comparison": by[(s.comparison_vdd, sram.SIX_T)].faults
        / max(by[(s.comparison_vdd, sram.EIGHT_T)].faults, 1),
        "ratio_6t_over_7t_at_comparison": by[(s.comparison_vdd, sram.SIX_T)].faults
        / max(by[(s.comparison_vdd, sram.SEVEN_T_NV)].faults, 1),
        "ratio_6t_over_7t_at_hardest": by[(s.hardest_vdd, sram.SIX_T)].faults
        / max(by[(s.hardest_vdd, sram.SEVEN_T_NV)].faults, 1),
    }
    paths = [
        write_csv(
            out_dir / "fig6e_faults.csv", config,
            ("vdd_v", "kind", "faults", "cells", "evaluations", "fault_rate"),
            [
                (r.vdd, r.kind, r.faults, r.cells, r.evaluations, r.fault_rate)
                for r in reports
            ],
        ),
        write_json(
            out_dir / "fig6e_summary.json", config,
            {
                "comparison_vdd_v": s.comparison_vdd,
                "hardest_vdd_v": s.hardest_vdd,
                "cycles": s.cycles,
                **ratios,
            },
        ),
    ]
    if figures:
        grid = list(s.vdd_grid)
        paths.append(
            plotting.save_series(
                out_dir / "fig6e_faults.png",
                grid,
                {
                    kind: [by[(v, kind)].fault_rate for v in grid]
                    for kind in (sram.SIX_T, sram.EIGHT_T, sram.SEVEN_T_NV)
                },
                xlabel="V_DD (V)",
                ylabel="fault rate",
                title="Power-up fault rate vs supply voltage",
                log_y=True,
            )
        )
    return paths


def puf_bitstream(config: ExperimentConfig, kind: str) -> list[int]:
    """Deterministic response bitstream: one noise-free pass of a seeded
    challenge list over a chip population (largest configured stage count).

    Bits are interleaved across dies (adjacent bits answer the same
    challenge on different chips) so that ordering artifacts don't dominate
    the statistics; residual structure, such as per-die response bias, is a
    property of the PUFs themselves and shows up in the test table.
    """
    stages = max(config.arbiter.stage_counts)
    manifest = arbiter.arbiter_manifest(stages, kind)
    variation = replace(config.variation, sample_count=config.nist.puf_chips)
    chips = sample_population(variation, manifest)
    challenges = arbiter.sample_challenges(
        stages, config.nist.puf_challenges, config.master_seed
    )
    env = config.sensor.sense_rails
    per_chip: list[list[int]] = []
    for chip in chips:
        puf = arbiter.build_puf(stages, kind, config.device, chip,
                                setup_window=config.arbiter.setup_window)
        table = arbiter._segment_delays(puf, env)
        per_chip.append(
            [
                arbiter.evaluate(puf, ch, env, noise_seed=0, _table=table).response
                for ch in challenges
            ]
        )
    return [row[j] for j in range(len(challenges)) for row in per_chip]


def run_nist(config: ExperimentConfig, out_dir: Path, figures: bool) -> list[Path]:
    """9-test statistical table over both PUF kinds' response bitstreams."""
    tables = {}
    paths = []
    for kind in (devices.INVERTER, devices.SCHMITT_TRIGGER):
        bits = puf_bitstream(config, kind)
        bit_path = out_dir / f"nist_bits_{kind}.txt"
        sram.write_fingerprint(bits, bit_path)
        paths.append(bit_path)
        tables[kind] = [
            {"test": r.test_name, "p_value": r.p_value, "pass": r.passed,
             "note": r.note}
            for r in nist.nist_suite(bits)
        ]
    paths.append(
        write_json(
            out_dir / "nist_report.json", config,
            {
                "stream_bits": config.nist.puf_chips * config.nist.puf_challenges,
                "construction": "zero-noise responses, interleaved across dies",
                "results": tables,
            },
        )
    )
    if figures:
        categories = [r["test"] for r in tables[devices.INVERTER]]
        paths.append(
            plotting.save_bars(
                out_dir / "nist_pvalues.png",
                categories,
                {
                    kind: [r["p_value"] or 0.0 for r in rows]
                    for kind, rows in tables.items()
                },
                ylabel="p-value",
                title="NIST subset p-values per PUF kind",
            )
        )
    return paths


def run_experiment(
    name: str,
    config: ExperimentConfig,
    out_dir: str | Path,
    figures: bool | None = None,
) -> list[Path]:
    """Execute one named pipeline end to end; returns the written paths."""
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; known: {EXPERIMENTS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    figs = config.output.figures if figures is None else figures
    if name == "fig1":
        return run_fig1(config, out, figs)
    if name == "fig2b":
        return run_fig2b(config, out, figs)
    if name in _FIG4_VARIANTS:
        return run_fig4(config, out, figs, name)
    if name == "fig5":
        return run_fig5(config, out, figs)
    if name == "fig6e":
        return run_fig6e(config, out, figs)
    return run_nist(config, out, figs)
