"""Acceptance suite.

Each criterion runs at its stated tolerance and prints one PASS/FAIL line
(visible with `pytest -s` or in pytest's captured output). Numbered
tolerances and runtime limits are pinned here, not deferred.
"""

import math
import time
from dataclasses import replace
from statistics import NormalDist

import mpmath
import numpy as np
import pytest

from stpuf import arbiter, devices, experiments, metrics, nist, rngstream, sensor, sram
from stpuf.population import sample_population
from stpuf.sensor import RecyclingSensor, ro_delay

pytestmark = pytest.mark.acceptance


def _record(criterion: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def fig4_tables(cfg):
    usages = list(cfg.sensor.usages_s)
    tables = {}
    start = time.perf_counter()
    for variant in ("inv-uncal", "inv-cal", "inv-hv-cal", "st-hv-cal-boost"):
        sc = cfg.sensor_config(variant)
        chips = sample_population(cfg.variation, sensor.sensor_manifest(sc))
        tables[variant] = sensor.detection_experiment(
            chips, sc, cfg.device, cfg.aging, usages, variant=variant
        )
    return tables, time.perf_counter() - start


def test_criterion_1_sensitivity_endpoint(cfg):
    start = time.perf_counter()
    value = devices.sensitivity_ratio(
        cfg.device.delta_vth_sweep_max, cfg.sensor.sense_rails, cfg.device
    )
    elapsed = time.perf_counter() - start
    ok = 4.0 <= value <= 6.0 and elapsed < 1.0
    _record(
        "criterion 1 (sensitivity endpoint)",
        ok,
        f"ratio={value:.3f} in [4.0, 6.0], runtime={elapsed:.3f}s < 1s",
    )


def test_criterion_2_calibration_soundness(cfg):
    start = time.perf_counter()
    sc = cfg.sensor_config("inv-cal")
    chips = sample_population(cfg.variation, sensor.sensor_manifest(sc))
    env = sc.sense_rails
    pre, post = [], []
    for chip in chips:
        s = RecyclingSensor(sc, cfg.device, cfg.aging, chip)
        pre.append(ro_delay(s.reference, env) - ro_delay(s.stressed, env))
        s.calibrate()
        post.append(ro_delay(s.reference, env) - ro_delay(s.stressed, env))
    elapsed = time.perf_counter() - start
    nonneg = sum(1 for d in post if d >= 0.0)
    pre_std = float(np.std(np.abs(pre)))
    post_std = float(np.std(post))
    ok = (
        nonneg == len(chips)
        and post_std < pre_std
        and elapsed < 30.0
    )
    _record(
        "criterion 2 (calibration soundness)",
        ok,
        f"{nonneg}/{len(chips)} diffs >= 0, post std {post_std:.3e} < pre std "
        f"{pre_std:.3e}, runtime={elapsed:.1f}s < 30s",
    )


def test_criterion_3_fig4_progression(fig4_tables, cfg):
    tables, elapsed = fig4_tables
    err = {v: t.error_rates() for v, t in tables.items()}
    a, b, c = err["inv-cal"], err["inv-hv-cal"], err["st-hv-cal-boost"]
    uncal = err["inv-uncal"]
    checks = {
        "a: 1-day <= 1%": a[86400.0] <= 0.01,
        "a: 15-min < 5%": a[900.0] < 0.05,
        "b: 15-min < 1%": b[900.0] < 0.01,
        "b: 10-s <= 15%": b[10.0] <= 0.15,
        "c: >=10-s separated": all(c[u] == 0.0 for u in (10.0, 90.0, 900.0, 86400.0)),
        "c: 0.1-s < 1%": c[0.1] < 0.01,
        "ordering": all(
            c[u] <= b[u] <= a[u] <= uncal[u] for u in cfg.sensor.usages_s
        ),
        "runtime < 300s": elapsed < 300.0,
    }
    detail = (
        f"a(1d)={a[86400.0]:.3f} a(15m)={a[900.0]:.3f} b(15m)={b[900.0]:.3f} "
        f"b(10s)={b[10.0]:.3f} c(10s)={c[10.0]:.3f} c(0.1s)={c[0.1]:.3f} "
        f"runtime={elapsed:.1f}s; " + ", ".join(k for k, v in checks.items() if not v)
    )
    _record("criterion 3 (Fig-4 progression)", all(checks.values()), detail)


def test_criterion_3_monotone_tick_delta(fig4_tables, cfg):
    tables, _ = fig4_tables
    usages = sorted(cfg.sensor.usages_s)
    bad = 0
    for table in tables.values():
        per_chip: dict[int, list[int]] = {}
        for row in table.rows:
            per_chip.setdefault(row.chip_id, []).append((row.usage_s, row.tick_delta))
        for rows in per_chip.values():
            deltas = [d for _, d in sorted(rows)]
            if any(b < a for a, b in zip(deltas, deltas[1:])):
                bad += 1
    _record(
        "criterion 3 invariant (tick delta monotone in usage)",
        bad == 0,
        f"{bad} chip trajectories decreased; usages={usages}",
    )


def test_criterion_4_fig5_spread(cfg):
    start = time.perf_counter()
    env = cfg.sensor.sense_rails
    stds = {}
    fracs = {}
    for kind in (devices.INVERTER, devices.SCHMITT_TRIGGER):
        for stages in cfg.arbiter.stage_counts:
            chips = sample_population(
                cfg.variation, arbiter.arbiter_manifest(stages, kind)
            )
            pufs = [
                arbiter.build_puf(stages, kind, cfg.device, chip,
                                  setup_window=cfg.arbiter.setup_window)
                for chip in chips
            ]
            challenges = (
                arbiter.all_challenges(stages)
                if stages <= 4
                else arbiter.sample_challenges(
                    stages, cfg.arbiter.delta_challenges, cfg.master_seed
                )
            )
            dist = arbiter.delta_distribution(pufs, challenges, env)
            stds[(kind, stages)] = dist.std
            fracs[(kind, stages)] = dist.fraction_positive
    elapsed = time.perf_counter() - start
    wider = all(
        stds[(devices.SCHMITT_TRIGGER, s)] > stds[(devices.INVERTER, s)]
        for s in cfg.arbiter.stage_counts
    )
    balanced = all(0.45 <= f <= 0.55 for f in fracs.values())
    ok = wider and balanced and elapsed < 60.0
    _record(
        "criterion 4 (Fig-5 spread)",
        ok,
        f"std ratios={[round(stds[(devices.SCHMITT_TRIGGER, s)] / stds[(devices.INVERTER, s)], 2) for s in cfg.arbiter.stage_counts]}, "
        f"positive fractions={[round(f, 3) for f in fracs.values()]}, "
        f"runtime={elapsed:.1f}s < 60s",
    )


def test_criterion_5_intra_hd_improvement(cfg):
    start = time.perf_counter()
    stages = cfg.arbiter.hd_stage_count
    challenges = arbiter.all_challenges(stages)
    reports = {}
    for kind in (devices.INVERTER, devices.SCHMITT_TRIGGER):
        chips = sample_population(
            cfg.variation, arbiter.arbiter_manifest(stages, kind)
        )
        pufs = [
            arbiter.build_puf(stages, kind, cfg.device, chip,
                              setup_window=cfg.arbiter.setup_window)
            for chip in chips
        ]
        ds = arbiter.crp_dataset(
            pufs, len(challenges), cfg.arbiter.hd_repeats, cfg.arbiter_noise,
            seed=cfg.master_seed, challenges=challenges,
        )
        reports[kind] = metrics.intra_hd(ds)
    elapsed = time.perf_counter() - start
    inv, st = reports[devices.INVERTER], reports[devices.SCHMITT_TRIGGER]
    improvement = (inv.mean - st.mean) / inv.mean
    sigma_improvement = (inv.sigma - st.sigma) / inv.sigma
    ok = 0.30 <= improvement <= 0.60 and sigma_improvement >= 0.0 and elapsed < 120.0
    _record(
        "criterion 5 (intra-HD improvement)",
        ok,
        f"mean improvement={improvement:.3f} in [0.30, 0.60], "
        f"sigma improvement={sigma_improvement:.3f} >= 0, "
        f"noise spec={cfg.arbiter_noise}, runtime={elapsed:.1f}s < 120s",
    )


def test_criterion_6_sram_robustness(cfg):
    start = time.perf_counter()
    s = cfg.sram
    arrays = {
        sram.SIX_T: sram.build_array(sram.SIX_T, s.rows, s.cols, cfg.variation),
        sram.EIGHT_T: sram.build_array(
            sram.EIGHT_T, s.rows, s.cols, cfg.variation,
            latch_strength=s.latch_strength),
        sram.SEVEN_T_NV: sram.build_array(
            sram.SEVEN_T_NV, s.rows, s.cols, cfg.variation,
            mtj_strength=s.mtj_strength),
    }
    reports = sram.fault_sweep(
        arrays, [s.comparison_vdd, s.hardest_vdd], s.cycles, cfg.sram_noise,
        seed=cfg.master_seed,
    )
    elapsed = time.perf_counter() - start
    by = {(r.vdd, r.kind): r.faults for r in reports}
    r8 = by[(s.comparison_vdd, sram.SIX_T)] / by[(s.comparison_vdd, sram.EIGHT_T)]
    r7_cmp = by[(s.comparison_vdd, sram.SIX_T)] / by[(s.comparison_vdd, sram.SEVEN_T_NV)]
    r7_floor = by[(s.hardest_vdd, sram.SIX_T)] / by[(s.hardest_vdd, sram.SEVEN_T_NV)]
    ok = (
        3.0 <= r8 <= 6.0
        and 2.0 <= r7_cmp <= 20.0
        and r7_floor >= 2.3
        and elapsed < 120.0
    )
    _record(
        "criterion 6 (SRAM robustness ratios)",
        ok,
        f"6T/8T@{s.comparison_vdd}V={r8:.2f} in [3, 6], "
        f"6T/7T@{s.comparison_vdd}V={r7_cmp:.2f} in [2, 20], "
        f"6T/7T@{s.hardest_vdd}V={r7_floor:.2f} >= 2.3, "
        f"runtime={elapsed:.1f}s < 120s",
    )


def test_criterion_7_oracle_equivalences(cfg):
    from tests.test_arbiter import trace_oracle

    env = cfg.sensor.sense_rails
    # (a) exhaustive trace oracle, exact equality, <= 4 stages
    trace_ok = True
    for stages in (2, 3, 4):
        manifest = arbiter.arbiter_manifest(stages, devices.SCHMITT_TRIGGER)
        chips = sample_population(replace(cfg.variation, sample_count=3), manifest)
        for chip in chips:
            puf = arbiter.build_puf(stages, devices.SCHMITT_TRIGGER, cfg.device, chip)
            for ch in arbiter.all_challenges(stages):
                if arbiter.path_delays(puf, ch, env) != trace_oracle(puf, ch, env):
                    trace_ok = False

    # (b) 6T flip rate vs Phi(-|s|/sigma_n), 3 standard errors over 1e5 trials
    skew = 0.012
    cell = sram.BitcellParams(sram.SIX_T, skew=skew)
    n = 100_000
    flips = sum(1 - sram.power_up(cell, env, cfg.sram_noise, seed=i) for i in range(n))
    expected = NormalDist().cdf(-abs(skew) / cfg.sram_noise.sigma_n(env))
    se = math.sqrt(expected * (1 - expected) / n)
    flip_ok = abs(flips / n - expected) < 3 * se

    # (c) NIST frequency p-value vs direct mpmath formula to 6 decimals
    freq_ok = True
    for seed in (0, 1, 2):
        bits = rngstream.philox(cfg.master_seed, "freq-acc", seed).integers(
            0, 2, 128, dtype=np.uint8
        )
        s_obs = abs(int(np.sum(2 * bits.astype(int) - 1)))
        oracle = float(mpmath.erfc(s_obs / mpmath.sqrt(2 * bits.size)))
        if abs(nist.frequency(bits) - oracle) > 1e-6:
            freq_ok = False

    ok = trace_ok and flip_ok and freq_ok
    _record(
        "criterion 7 (oracle equivalences)",
        ok,
        f"trace oracle exact={trace_ok}, flip rate within 3 SE={flip_ok} "
        f"(got {flips / n:.4f} vs {expected:.4f} +/- {3 * se:.4f}), "
        f"frequency oracle to 1e-6={freq_ok}",
    )


def test_criterion_8_statistical_sanity(cfg):
    start = time.perf_counter()
    trials = cfg.nist.trials
    passes = {name: 0 for name in nist.TEST_NAMES}
    for trial in range(trials):
        bits = rngstream.philox(cfg.master_seed, "nist-null", trial).integers(
            0, 2, cfg.nist.stream_bits, dtype=np.uint8
        )
        for r in nist.nist_suite(bits):
            passes[r.test_name] += int(r.passed)
    proportions_ok = all(n >= 96 for n in passes.values())

    cells = sram.build_array(sram.SIX_T, cfg.sram.rows, cfg.sram.cols, cfg.variation)
    reg_noise = rngstream.philox(cfg.master_seed, "sram-register").standard_normal(
        len(cells)
    )
    registered = sram.register_array(
        cells, devices.EnvCondition(cfg.sram_noise.vdd_nominal), cfg.sram_noise,
        reg_noise,
    )
    u = sram.uniformity(sram.registered_bits(registered))
    uniform_ok = 0.45 <= u <= 0.55
    elapsed = time.perf_counter() - start
    ok = proportions_ok and uniform_ok
    _record(
        "criterion 8 (statistical sanity)",
        ok,
        f"per-test pass counts over {trials} trials: "
        f"{ {k: v for k, v in passes.items()} } (all >= 96), "
        f"array uniformity={u:.4f} in [0.45, 0.55], runtime={elapsed:.1f}s",
    )


def test_criterion_9_determinism(small_cfg, cfg, tmp_path):
    mismatched = []
    for name in experiments.EXPERIMENTS:
        first = experiments.run_experiment(name, small_cfg, tmp_path / "r1" / name)
        second = experiments.run_experiment(name, small_cfg, tmp_path / "r2" / name)
        for a, b in zip(first, second):
            if a.read_bytes() != b.read_bytes():
                mismatched.append(f"{name}/{a.name}")
    # one full-scale spot check
    f1 = experiments.run_experiment("fig2b", cfg, tmp_path / "full1")
    f2 = experiments.run_experiment("fig2b", cfg, tmp_path / "full2")
    for a, b in zip(f1, f2):
        if a.read_bytes() != b.read_bytes():
            mismatched.append(f"full/{a.name}")
    _record(
        "criterion 9 (determinism)",
        not mismatched,
        "all experiment reruns bit-identical"
        if not mismatched
        else f"mismatched: {mismatched}",
    )
