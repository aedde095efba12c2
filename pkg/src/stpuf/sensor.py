"""Self-calibrating ring-oscillator recycling sensor.

A sensor is a pair of ring oscillators sharing one die: a reference RO that
sleeps during normal operation (never ages) and a stressed RO powered from
boosted rails while the chip is in use. Calibration at t=0 designates the
faster RO as the stressed one and slows it with programmable load quanta
until the fresh-minus-stressed delay difference is non-negative and smaller
than one quantum. Sensing counts ticks of both ROs in a fixed timer window
at nominal rails; the tick difference encodes accumulated usage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from stpuf import devices, rngstream
from stpuf.devices import (
    AgingModelParams,
    DeviceConstants,
    EnvCondition,
    GateParams,
)
from stpuf.errors import CalibrationRangeError
from stpuf.population import ChipInstance


@dataclass(frozen=True)
class RingOscillator:
    """Odd chain of identical-kind gates with per-stage programmable trim.

    Trim is stored as integer quantum counts so loads are multiples of the
    quantum by construction.
    """

    stages: tuple[GateParams, ...]
    trim_quantum: float                      # F
    trim_counts: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.stages) % 2 == 0 or not self.stages:
            raise ValueError(f"stage count must be odd, got {len(self.stages)}")
        if self.trim_quantum <= 0:
            raise ValueError("trim_quantum must be > 0")
        counts = self.trim_counts or (0,) * len(self.stages)
        if len(counts) != len(self.stages):
            raise ValueError("trim_counts length must match stage count")
        if any(c < 0 for c in counts):
            raise ValueError("trim counts must be >= 0")
        object.__setattr__(self, "trim_counts", tuple(counts))

    def trim_load(self, i: int) -> float:
        return self.trim_counts[i] * self.trim_quantum

    def is_unstressed(self) -> bool:
        return all(
            t.vth_aging == 0.0 for g in self.stages for t in g.transistors
        )


def stage_delays(ro: RingOscillator, env: EnvCondition) -> list[float]:
    """Per-stage delay including trim load (delay is linear in load)."""
    return [
        devices.gate_delay(g, env) * (1.0 + ro.trim_load(i) / g.load_cap)
        for i, g in enumerate(ro.stages)
    ]


def ro_delay(ro: RingOscillator, env: EnvCondition) -> float:
    return sum(stage_delays(ro, env))


def ro_frequency(ro: RingOscillator, env: EnvCondition) -> float:
    """Oscillation frequency: f = 1 / (2 * sum of stage delays), Hz."""
    return 1.0 / (2.0 * ro_delay(ro, env))


@dataclass(frozen=True)
class SensorConfig:
    """Sensor operating parameters. Defaults follow the engine config."""

    stress_rails: EnvCondition = EnvCondition(1.4, -0.25)
    sense_rails: EnvCondition = EnvCondition(1.0, 0.0)
    timer_window: float = 4.0e-5            # s
    trim_quantum: float = 4.0e-17           # F
    gate_kind: str = devices.SCHMITT_TRIGGER
    high_vth: bool = True
    calibrated: bool = True
    stage_count: int = 31
    max_trim_quanta: int = 20000            # calibration budget per sensor
    stress_ripple_v: float = 0.0            # charge-pump ripple amplitude (0 = ideal rails)

    def __post_init__(self):
        if self.timer_window <= 0:
            raise ValueError("timer_window must be > 0")
        if self.stress_rails.swing < self.sense_rails.swing:
            raise ValueError("stress rails must be at least as wide as sense rails")


@dataclass(frozen=True)
class SensorReading:
    ref_ticks: int
    stressed_ticks: int
    usage_estimate: float | str = "fresh"    # seconds, or "fresh"

    @property
    def tick_delta(self) -> int:
        return self.ref_ticks - self.stressed_ticks


def sensor_manifest(config: SensorConfig, prefix: str = "sensor") -> list[str]:
    """Device paths for one sensor (two ROs) for population sampling."""
    tcount = devices.transistor_count(config.gate_kind)
    return [
        f"{prefix}/ro{r}/s{s:02d}/t{t}"
        for r in (0, 1)
        for s in range(config.stage_count)
        for t in range(tcount)
    ]


def _build_ro(
    config: SensorConfig,
    consts: DeviceConstants,
    chip: ChipInstance | None,
    prefix: str,
    ro_index: int,
) -> RingOscillator:
    tcount = devices.transistor_count(config.gate_kind)
    gates = []
    for s in range(config.stage_count):
        shifts = tuple(
            chip.shift(f"{prefix}/ro{ro_index}/s{s:02d}/t{t}") if chip else 0.0
            for t in range(tcount)
        )
        gates.append(
            devices.build_gate(config.gate_kind, consts, shifts, high_vth=config.high_vth)
        )
    return RingOscillator(tuple(gates), config.trim_quantum)


def calibrate(
    fresh: RingOscillator,
    stressed: RingOscillator,
    env: EnvCondition,
    quantum: float,
    max_quanta: int = 20000,
) -> tuple[RingOscillator, RingOscillator]:
    """Role-assign and trim a fresh RO pair.

    The faster RO becomes the "stressed" one (ties break to the lower index
    as "fresh") and receives trim quanta greedily, round-robin across its
    stages, until delay(fresh) - delay(stressed) lands in [0, one quantum's
    delay equivalent). Returns (fresh, stressed).
    """
    for ro in (fresh, stressed):
        if not ro.is_unstressed():
            raise ValueError("calibration requires unstressed ring oscillators")
    d0, d1 = ro_delay(fresh, env), ro_delay(stressed, env)
    if d0 < d1:
        fresh, stressed = stressed, fresh  # faster first argument takes stress
        d0, d1 = d1, d0

    base = stage_delays(replace(stressed, trim_counts=(0,) * len(stressed.stages)), env)
    gains = [quantum * d / g.load_cap for d, g in zip(base, stressed.stages)]
    counts = list(stressed.trim_counts)
    diff = d0 - d1
    added, rr = 0, 0
    while diff >= gains[rr]:
        counts[rr] += 1
        diff -= gains[rr]
        added += 1
        if added > max_quanta:
            raise CalibrationRangeError(
                f"calibration range exceeded: {added} quanta > budget {max_quanta}"
            )
        rr = (rr + 1) % len(gains)
    return fresh, replace(stressed, trim_quantum=quantum, trim_counts=tuple(counts))


class RecyclingSensor:
    """Mutable per-chip sensor lifecycle: calibrate -> stress -> sense."""

    def __init__(
        self,
        config: SensorConfig,
        consts: DeviceConstants,
        aging_model: AgingModelParams,
        chip: ChipInstance | None = None,
        prefix: str = "sensor",
        noise_seed: int | None = None,
    ):
        self.config = config
        self.aging_model = aging_model
        self.reference = _build_ro(config, consts, chip, prefix, 0)
        self.stressed = _build_ro(config, consts, chip, prefix, 1)
        self.calibrated = False
        self.stressed_seconds = 0.0
        self.stress_intervals = 0
        self.noise_seed = (chip.chip_id if chip else 0) if noise_seed is None else noise_seed

    def calibrate(self) -> None:
        self.reference, self.stressed = calibrate(
            self.reference,
            self.stressed,
            self.config.sense_rails,
            self.config.trim_quantum,
            self.config.max_trim_quanta,
        )
        self.calibrated = True

    def _stress_env(self) -> EnvCondition:
        """Stress rails, with optional charge-pump ripple drawn per interval."""
        env = self.config.stress_rails
        ripple = self.config.stress_ripple_v
        if ripple == 0.0:
            return env
        k = self.stress_intervals
        dv = ripple * (2.0 * rngstream.uniform(self.noise_seed, "ripple-vdd", k) - 1.0)
        dg = ripple * (2.0 * rngstream.uniform(self.noise_seed, "ripple-vss", k) - 1.0)
        return EnvCondition(env.vdd + dv, env.vss + dg, env.temperature)

    def stress(self, duration: float) -> None:
        """Age every transistor of the stressed RO at the stress rails.

        The reference RO sleeps during normal mode and is never touched.
        """
        if duration < 0:
            raise ValueError(f"stress duration must be >= 0, got {duration}")
        is_st = self.config.gate_kind == devices.SCHMITT_TRIGGER
        env = self._stress_env()
        new_stages = []
        for gate in self.stressed.stages:
            devs = []
            for t in gate.transistors:
                t = devices.accrue_aging(t, env, duration, self.aging_model, devices.BTI)
                t = devices.accrue_aging(
                    t, env, duration, self.aging_model, devices.HCI, st_gate=is_st
                )
                devs.append(t)
            new_stages.append(replace(gate, transistors=tuple(devs)))
        self.stressed = replace(self.stressed, stages=tuple(new_stages))
        self.stressed_seconds += duration
        if duration > 0:
            self.stress_intervals += 1

    def sense(self) -> SensorReading:
        """Count ticks of each RO in the timer window at sense rails."""
        env = self.config.sense_rails
        window = self.config.timer_window
        ref_ticks = math.floor(window * ro_frequency(self.reference, env))
        str_ticks = math.floor(window * ro_frequency(self.stressed, env))
        reading = SensorReading(ref_ticks, str_ticks)
        return replace(reading, usage_estimate=self._estimate_usage(reading))

    def _estimate_usage(self, reading: SensorReading) -> float | str:
        """Invert the nominal BTI law to map a tick delta to stress seconds."""
        if reading.tick_delta <= 0:
            return "fresh"
        env = self.config.sense_rails
        f_ref = ro_frequency(self.reference, env)
        total_delay = 1.0 / (2.0 * f_ref)
        delta_delay = reading.tick_delta / (
            2.0 * self.config.timer_window * f_ref * f_ref
        )
        gate = self.stressed.stages[0]
        pu, pd = devices.composite_thresholds(gate, env)
        overdrive = env.swing - 0.5 * (pu + pd)
        stack = 2.0 + gate.feedback_eta if gate.kind == devices.SCHMITT_TRIGGER else 1.0
        per_device = delta_delay * overdrive / (gate.alpha * total_delay * stack)
        m = self.aging_model
        accel = math.exp(
            m.bti_voltage_gamma
            * (self.config.stress_rails.swing - m.reference_stress_voltage)
        )
        if per_device <= 0:
            return "fresh"
        return (per_device / (m.bti_prefactor * accel)) ** (1.0 / m.bti_time_exponent)


def stress(sensor: RecyclingSensor, duration: float) -> RecyclingSensor:
    sensor.stress(duration)
    return sensor


def sense(sensor: RecyclingSensor) -> SensorReading:
    return sensor.sense()


@dataclass
class DetectionRow:
    chip_id: int
    usage_s: float
    ref_ticks: int
    stressed_ticks: int
    tick_delta: int
    classified: bool


@dataclass
class ErrorRateTable:
    """Detection outcomes for one sensor variant over a population."""

    variant: str
    threshold: int
    usages: list[float]
    fresh_deltas: list[int]
    rows: list[DetectionRow] = field(default_factory=list)

    def deltas(self, usage: float) -> list[int]:
        return [r.tick_delta for r in self.rows if r.usage_s == usage]

    def error_rate(self, usage: float) -> float:
        """Missed-detection (false-negative) rate for one usage duration."""
        rows = [r for r in self.rows if r.usage_s == usage]
        missed = sum(1 for r in rows if not r.classified)
        return missed / len(rows)

    def error_rates(self) -> dict[float, float]:
        return {u: self.error_rate(u) for u in self.usages}

    def histogram(self, usage: float) -> dict[int, int]:
        counts: dict[int, int] = {}
        for d in self.deltas(usage):
            counts[d] = counts.get(d, 0) + 1
        return dict(sorted(counts.items()))


def detection_experiment(
    chips: list[ChipInstance],
    config: SensorConfig,
    consts: DeviceConstants,
    aging_model: AgingModelParams,
    usages: list[float],
    threshold_policy: str | int = "zero_fp",
    variant: str = "sensor",
    prefix: str = "sensor",
) -> ErrorRateTable:
    """Classify each chip as recycled after each usage duration.

    The default threshold policy is zero false positives on fresh chips: the
    threshold is the maximum tick delta observed across the unstressed
    (calibrated) population, and a chip reads recycled iff its delta exceeds
    it. Aging depends only on total stressed seconds, so usages are visited
    cumulatively in ascending order.
    """
    if not chips:
        raise ValueError("population is empty")
    usages = sorted(usages)
    sensors: list[RecyclingSensor] = []
    fresh_deltas: list[int] = []
    for chip in chips:
        s = RecyclingSensor(config, consts, aging_model, chip, prefix)
        if config.calibrated:
            s.calibrate()
        sensors.append(s)
        fresh_deltas.append(s.sense().tick_delta)

    if threshold_policy == "zero_fp":
        threshold = max(fresh_deltas)
    else:
        threshold = int(threshold_policy)

    table = ErrorRateTable(
        variant=variant, threshold=threshold, usages=list(usages),
        fresh_deltas=fresh_deltas,
    )
    for chip, s in zip(chips, sensors):
        elapsed = 0.0
        for usage in usages:
            s.stress(usage - elapsed)
            elapsed = usage
            r = s.sense()
            table.rows.append(
                DetectionRow(
                    chip_id=chip.chip_id,
                    usage_s=usage,
                    ref_ticks=r.ref_ticks,
                    stressed_ticks=r.stressed_ticks,
                    tick_delta=r.tick_delta,
                    classified=r.tick_delta > threshold,
                )
            )
    return table
