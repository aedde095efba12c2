"""Command-line interface.

Subcommands: calibrate, sensor-sim, arbiter-sim, sram-sim, metrics, run.
Exit code 0 on success; on failure a machine-readable JSON error
({"error": <category>, "message": ...}) is printed to stderr and the exit
code identifies the category class (2 config/usage, 3 engine, 4 I/O).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from stpuf import arbiter, calibrate, devices, experiments, metrics, nist, rngstream, sensor, sram
from stpuf import config as config_mod
from stpuf.errors import ConfigError, StpufError
from stpuf.population import sample_population

_USAGE_UNITS = {
    "s": 1.0, "sec": 1.0, "secs": 1.0,
    "min": 60.0, "m": 60.0,
    "h": 3600.0, "hr": 3600.0, "hour": 3600.0, "hours": 3600.0,
    "d": 86400.0, "day": 86400.0, "days": 86400.0,
}

_KIND_ALIASES = {"inv": devices.INVERTER, "inverter": devices.INVERTER,
                 "st": devices.SCHMITT_TRIGGER}


def parse_usage(text: str) -> float:
    """Parse a duration like '0.1s', '1.5min', '15min' or '1day' to seconds."""
    text = text.strip().lower()
    i = len(text)
    while i > 0 and not (text[i - 1].isdigit() or text[i - 1] == "."):
        i -= 1
    number, unit = text[:i], text[i:]
    if not number:
        raise ConfigError(f"cannot parse usage duration {text!r}")
    if unit and unit not in _USAGE_UNITS:
        raise ConfigError(f"unknown usage unit {unit!r} in {text!r}")
    return float(number) * _USAGE_UNITS.get(unit, 1.0)


def parse_grid(text: str) -> list[float]:
    """Parse 'start:stop:step' (inclusive) or a comma list into a V_DD grid."""
    if ":" in text:
        start_s, stop_s, step_s = text.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
        if step <= 0:
            raise ConfigError(f"grid step must be > 0 in {text!r}")
        n = int(round(abs(stop - start) / step))
        lo, hi = min(start, stop), max(start, stop)
        grid = [round(lo + i * step, 10) for i in range(n + 1) if lo + i * step <= hi + 1e-12]
        return sorted(grid, reverse=True)
    return [float(v) for v in text.split(",")]


def _load_config(path: str | None) -> config_mod.ExperimentConfig:
    if path is None:
        return config_mod.default_config()
    return config_mod.load_config(path)


def _population(config, manifest, chips_override: int | None):
    variation = config.variation
    if chips_override:
        variation = replace(variation, sample_count=chips_override)
    return sample_population(variation, manifest)


def cmd_calibrate(args) -> int:
    doc = (
        config_mod.default_config_dict()
        if args.config is None
        else json.loads(Path(args.config).read_text(encoding="utf-8"))
    )
    search = calibrate.SearchSpec(chips=args.chips)
    result_doc, achieved = calibrate.calibrate_constants(doc, search=search)
    config_mod.save_config(result_doc, args.out)
    print(f"wrote calibrated config to {args.out}")
    for entry in result_doc["provenance"]["targets"]:
        band = entry["band"]
        print(
            f"  {entry['name']:28s} achieved={entry['achieved']:.4f} "
            f"band=[{band[0]:g}, {band[1]:g}] role={entry['role']}"
        )
    return 0


def cmd_sensor_sim(args) -> int:
    config = _load_config(args.config)
    usages = (
        [parse_usage(u) for u in args.usages.split(",")]
        if args.usages
        else list(config.sensor.usages_s)
    )
    sc = config.sensor_config(args.variant)
    chips = _population(config, sensor.sensor_manifest(sc), args.chips)
    if args.export_population:
        from stpuf.population import export_population

        export_population(chips, args.export_population)
        print(f"wrote population audit file to {args.export_population}")
    table = sensor.detection_experiment(
        chips, sc, config.device, config.aging, usages, variant=args.variant
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    experiments.write_csv(
        out, config,
        ("chip_id", "design_variant", "usage_s", "ref_ticks", "stressed_ticks",
         "tick_delta", "classified"),
        [
            (r.chip_id, args.variant, r.usage_s, r.ref_ticks, r.stressed_ticks,
             r.tick_delta, r.classified)
            for r in table.rows
        ],
    )
    hist_rows = [(0.0, d, c) for d, c in sorted(
        experiments._count_hist(table.fresh_deltas))]
    for u in usages:
        hist_rows.extend((u, d, c) for d, c in experiments._count_hist(table.deltas(u)))
    experiments.write_csv(
        out.with_name(out.stem + "_hist.csv"), config,
        ("usage_s", "tick_delta", "count"), hist_rows,
    )
    print(f"variant={args.variant} threshold={table.threshold} chips={len(chips)}")
    for u in usages:
        print(f"  usage {u:>10g} s: missed {table.error_rate(u) * 100:6.2f}%")
    print(f"wrote {out}")
    return 0


def cmd_arbiter_sim(args) -> int:
    config = _load_config(args.config)
    kind = _KIND_ALIASES[args.kind]
    manifest = arbiter.arbiter_manifest(args.stages, kind)
    chips = _population(config, manifest, args.chips)
    pufs = [
        arbiter.build_puf(args.stages, kind, config.device, chip,
                          setup_window=config.arbiter.setup_window)
        for chip in chips
    ]
    dataset = arbiter.crp_dataset(
        pufs, args.challenges, args.repeats, config.arbiter_noise,
        seed=config.master_seed,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    arbiter.write_crp_dataset(dataset, out)
    print(
        f"wrote {len(dataset.responses)} response vectors "
        f"({args.challenges} challenges x {args.repeats} repeats x "
        f"{len(pufs)} chips) to {out}"
    )
    return 0


def cmd_sram_sim(args) -> int:
    config = _load_config(args.config)
    rows, cols = (int(v) for v in args.array.lower().split("x"))
    grid = parse_grid(args.vdd_grid) if args.vdd_grid else list(config.sram.vdd_grid)
    s = config.sram
    builders = {
        sram.SIX_T: dict(),
        sram.EIGHT_T: dict(latch_strength=s.latch_strength),
        sram.SEVEN_T_NV: dict(mtj_strength=s.mtj_strength),
    }
    arrays = {
        args.kind: sram.build_array(
            args.kind, rows, cols, config.variation, **builders[args.kind]
        )
    }
    reports = sram.fault_sweep(
        arrays, grid, args.cycles, config.sram_noise, seed=config.master_seed
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    experiments.write_csv(
        out, config,
        ("vdd_v", "kind", "faults", "cells", "evaluations", "fault_rate"),
        [(r.vdd, r.kind, r.faults, r.cells, r.evaluations, r.fault_rate)
         for r in reports],
    )
    if args.fingerprint:
        cells = arrays[args.kind]
        reg_noise = rngstream.philox(
            config.master_seed, "sram-register").standard_normal(len(cells))
        registered = sram.register_array(
            cells, devices.EnvCondition(config.sram_noise.vdd_nominal), config.sram_noise,
            reg_noise,
        )
        sram.write_fingerprint(sram.registered_bits(registered), args.fingerprint)
        print(f"wrote fingerprint to {args.fingerprint}")
    for r in reports:
        print(f"  vdd={r.vdd:.2f} {r.kind}: {r.faults} faults "
              f"({r.fault_rate * 100:.2f}% of {r.evaluations})")
    print(f"wrote {out}")
    return 0


def cmd_metrics(args) -> int:
    config = _load_config(args.config)
    if not args.infile and not args.bits:
        raise ConfigError("metrics requires --in (CRP dataset) or --bits (bit-file)")
    if args.bits:
        bits = metrics.read_bitfile(args.bits)
        if not bits:
            raise ConfigError(f"bit-file {args.bits} contains no bits")
        report = {
            "bits": len(bits),
            "uniformity": sum(bits) / len(bits),
            "nist": [
                {"test": r.test_name, "p_value": r.p_value, "pass": r.passed,
                 "note": r.note}
                for r in nist.nist_suite(bits)
            ],
        }
        out = Path(args.report)
        out.parent.mkdir(parents=True, exist_ok=True)
        experiments.write_json(out, config, report)
        print(f"wrote {out}")
        return 0
    if args.stages:
        stage_count = args.stages
    else:
        with open(args.infile, encoding="utf-8") as fh:
            stage_count = 4 * len(fh.readline().split()[2])
    dataset = arbiter.read_crp_dataset(args.infile, stage_count)
    report: dict = {"stage_count_hint": stage_count}
    try:
        intra = metrics.intra_hd(dataset)
        report["intra_hd"] = {
            "mean": intra.mean, "sigma": intra.sigma, "pairs": intra.sample_count,
        }
    except ValueError as exc:
        report["intra_hd"] = {"error": str(exc)}
    try:
        inter = metrics.inter_hd(dataset)
        report["inter_hd"] = {
            "mean": inter.mean, "sigma": inter.sigma, "pairs": inter.sample_count,
        }
    except ValueError as exc:
        report["inter_hd"] = {"error": str(exc)}
    bits: list[int] = []
    for chip in dataset.chips():
        first = dataset.repeats(chip)[0]
        bits.extend(dataset.responses[(chip, first)])
    report["nist"] = [
        {"test": r.test_name, "p_value": r.p_value, "pass": r.passed, "note": r.note}
        for r in nist.nist_suite(bits)
    ]
    out = Path(args.report)
    out.parent.mkdir(parents=True, exist_ok=True)
    experiments.write_json(out, config, report)
    print(f"wrote {out}")
    return 0


def cmd_run(args) -> int:
    config = _load_config(args.config)
    names = list(experiments.EXPERIMENTS) if args.experiment == "all" else [args.experiment]
    out_dir = Path(args.out_dir or config.output.directory)
    figures = None if not args.no_figures else False
    for name in names:
        paths = experiments.run_experiment(name, config, out_dir, figures=figures)
        print(f"{name}: wrote {len(paths)} files under {out_dir}")
        for p in paths:
            print(f"  {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stpuf",
        description="Recycling-sensor and PUF behavioral simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit free constants to the target bands")
    p.add_argument("--config", help="starting config JSON (default: packaged)")
    p.add_argument("--out", default="config_calibrated.json")
    p.add_argument("--chips", type=int, default=150,
                   help="population size used during the search")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sensor-sim", help="recycling-sensor detection experiment")
    p.add_argument("--config")
    p.add_argument("--usages", help="comma list, e.g. 0.1s,10s,1.5min,15min,1day")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--variant", default="st-hv-cal-boost",
                   choices=sorted(config_mod.SENSOR_VARIANTS))
    p.add_argument("--chips", type=int, help="override population size")
    p.add_argument("--export-population", help="also write the sampled V_TH shifts here")
    p.set_defaults(func=cmd_sensor_sim)

    p = sub.add_parser("arbiter-sim", help="generate a CRP dataset")
    p.add_argument("--stages", type=int, default=4)
    p.add_argument("--kind", default="st", choices=sorted(_KIND_ALIASES))
    p.add_argument("--chips", type=int, default=500)
    p.add_argument("--challenges", type=int, default=64)
    p.add_argument("--repeats", type=int, default=11)
    p.add_argument("--out", default="crps.txt")
    p.add_argument("--config")
    p.set_defaults(func=cmd_arbiter_sim)

    p = sub.add_parser("sram-sim", help="SRAM PUF fault-vs-voltage sweep")
    p.add_argument("--kind", default="6t", choices=sorted(sram.KINDS))
    p.add_argument("--array", default="128x128")
    p.add_argument("--vdd-grid", help="start:stop:step or comma list, volts")
    p.add_argument("--cycles", type=int, default=100)
    p.add_argument("--out", default="faults.csv")
    p.add_argument("--fingerprint", help="also write the registered bits here")
    p.add_argument("--config")
    p.set_defaults(func=cmd_sram_sim)

    p = sub.add_parser("metrics", help="HD metrics + NIST table for a CRP dataset")
    p.add_argument("--in", dest="infile")
    p.add_argument("--bits", help="raw bit-file: run the NIST table only")
    p.add_argument("--report", default="report.json")
    p.add_argument("--stages", type=int, help="challenge bit length (default: inferred)")
    p.add_argument("--config")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("run", help="run a named experiment pipeline")
    p.add_argument("--experiment", required=True,
                   choices=[*experiments.EXPERIMENTS, "all"])
    p.add_argument("--config")
    p.add_argument("--out-dir")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _emit_error(exc.category, exc)
        return 2
    except StpufError as exc:
        _emit_error(exc.category, exc)
        return 3
    except OSError as exc:
        _emit_error("io", exc)
        return 4
    except ValueError as exc:
        _emit_error("argument", exc)
        return 2


def _emit_error(category: str, exc: Exception) -> None:
    print(json.dumps({"error": category, "message": str(exc)}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
