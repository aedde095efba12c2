"""Arbiter PUF with inverter or Schmitt-trigger delay stages.

A challenge routes a rising edge through a chain of switch stages; bit 0
selects the straight segments, bit 1 the crossed segments (crossing swaps
which physical rail each logical signal occupies). The arbiter compares
arrival times: response = 1 iff the top path wins (raw_delta = top - bottom
< 0). Within +/- setup_window of a tie the arbiter is metastable and the
response is a fair coin from the keyed noise stream.

Repeat-to-repeat noise has three components, all drawn from keyed streams:
common-mode V_DD and temperature perturbations (ranges in config) and a
small per-gate relative delay jitter that models local supply/thermal noise
on each traversed segment.

A segment whose gate stalls at a perturbed operating point (deep V_DD droop
on a process-tail chip) has infinite delay: the signal on that rail never
arrives and the other path wins the race deterministically, which is what
the physical arbiter would latch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from stpuf import devices, rngstream
from stpuf.devices import DeviceConstants, EnvCondition, GateParams
from stpuf.errors import GateStalledError
from stpuf.population import ChipInstance

SEGMENTS = ("ts", "bs", "tc", "bc")  # top/bottom straight, top/bottom cross


@dataclass(frozen=True)
class SwitchStage:
    """Four segment gates of one challenge-controlled switch."""

    top_straight: GateParams
    bottom_straight: GateParams
    top_cross: GateParams
    bottom_cross: GateParams

    def gates(self) -> tuple[GateParams, ...]:
        return (self.top_straight, self.bottom_straight,
                self.top_cross, self.bottom_cross)


@dataclass(frozen=True)
class ArbiterPufInstance:
    stages: tuple[SwitchStage, ...]
    stage_kind: str
    setup_window: float = 0.0    # s, metastability half-width

    def __post_init__(self):
        if self.setup_window < 0:
            raise ValueError("setup_window must be >= 0")

    @property
    def stage_count(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class CrpRecord:
    challenge: tuple[int, ...]
    response: int
    raw_delta: float             # s, top arrival minus bottom arrival


@dataclass(frozen=True)
class EnvNoiseSpec:
    """Evaluation-to-evaluation environmental disturbance model."""

    vdd_fraction: float = 0.10       # +/- fraction of nominal V_DD
    temp_min_k: float = 248.0
    temp_max_k: float = 358.0
    eval_jitter_rel: float = 0.008   # 1-sigma relative delay jitter per gate

    def is_zero(self) -> bool:
        return (
            self.vdd_fraction == 0.0
            and self.temp_min_k == self.temp_max_k == devices.TEMP_REF_K
            and self.eval_jitter_rel == 0.0
        )


def arbiter_manifest(stage_count: int, kind: str, prefix: str = "arbiter") -> list[str]:
    tcount = devices.transistor_count(kind)
    return [
        f"{prefix}/st{s:02d}/{seg}/t{t}"
        for s in range(stage_count)
        for seg in SEGMENTS
        for t in range(tcount)
    ]


def build_puf(
    stage_count: int,
    kind: str,
    consts: DeviceConstants,
    chip: ChipInstance | None = None,
    setup_window: float = 0.0,
    prefix: str = "arbiter",
) -> ArbiterPufInstance:
    tcount = devices.transistor_count(kind)
    stages = []
    for s in range(stage_count):
        gates = []
        for seg in SEGMENTS:
            shifts = tuple(
                chip.shift(f"{prefix}/st{s:02d}/{seg}/t{t}") if chip else 0.0
                for t in range(tcount)
            )
            gates.append(devices.build_gate(kind, consts, shifts))
        stages.append(SwitchStage(*gates))
    return ArbiterPufInstance(tuple(stages), kind, setup_window)


def _segment_delay(gate: GateParams, env: EnvCondition) -> float:
    try:
        return devices.gate_delay(gate, env)
    except GateStalledError:
        return math.inf  # stalled segment never propagates; its path loses


def _segment_delays(puf: ArbiterPufInstance, env: EnvCondition) -> list[tuple[float, ...]]:
    """Delay of all four segments per stage at one operating point."""
    return [tuple(_segment_delay(g, env) for g in st.gates()) for st in puf.stages]


def _accumulate(
    table: Sequence[tuple[float, ...]],
    challenge: Sequence[int],
    jitter: Sequence[tuple[float, float]] | None = None,
) -> tuple[float, float]:
    top = bottom = 0.0
    for i, bit in enumerate(challenge):
        ts, bs, tc, bc = table[i]
        jt, jb = jitter[i] if jitter is not None else (1.0, 1.0)
        if bit == 0:
            top += ts * jt
            bottom += bs * jb
        else:
            # crossing: the signal on the bottom rail traverses the
            # bottom-cross segment and lands on top, and vice versa
            top, bottom = bottom + bc * jb, top + tc * jt
    return top, bottom


def path_delays(
    puf: ArbiterPufInstance, challenge: Sequence[int], env: EnvCondition
) -> tuple[float, float]:
    """(top_arrival, bottom_arrival) for one challenge, seconds."""
    if len(challenge) != puf.stage_count:
        raise ValueError(
            f"challenge length {len(challenge)} != stage count {puf.stage_count}"
        )
    return _accumulate(_segment_delays(puf, env), challenge)


def _jitter_factors(
    noise_seed: int, stage_count: int, sigma: float
) -> list[tuple[float, float]] | None:
    if sigma == 0.0:
        return None
    return [
        (
            1.0 + sigma * rngstream.normal(noise_seed, "jit", i, "t"),
            1.0 + sigma * rngstream.normal(noise_seed, "jit", i, "b"),
        )
        for i in range(stage_count)
    ]


def evaluate(
    puf: ArbiterPufInstance,
    challenge: Sequence[int],
    env: EnvCondition,
    noise_seed: int,
    jitter_rel: float = 0.0,
    _table: Sequence[tuple[float, ...]] | None = None,
) -> CrpRecord:
    """One arbiter decision. noise_seed keys all evaluation noise (per-gate
    jitter and the metastability coin) and must be unique per evaluation."""
    if len(challenge) != puf.stage_count:
        raise ValueError(
            f"challenge length {len(challenge)} != stage count {puf.stage_count}"
        )
    table = _table if _table is not None else _segment_delays(puf, env)
    jitter = _jitter_factors(noise_seed, puf.stage_count, jitter_rel)
    top, bottom = _accumulate(table, challenge, jitter)
    raw = top - bottom
    if math.isnan(raw) or abs(raw) <= puf.setup_window:
        # tie (or both paths stalled): the arbiter is metastable
        response = rngstream.coin(noise_seed, "metastable")
    else:
        response = 1 if raw < 0 else 0
    return CrpRecord(tuple(challenge), response, raw)


def all_challenges(stage_count: int) -> list[tuple[int, ...]]:
    return [
        tuple((v >> (stage_count - 1 - i)) & 1 for i in range(stage_count))
        for v in range(2**stage_count)
    ]


def sample_challenges(stage_count: int, count: int, seed: int) -> list[tuple[int, ...]]:
    """Seeded uniform challenge sample (with possible repeats)."""
    return [
        tuple(
            rngstream.hash_u64(seed, "challenge", j, i) & 1
            for i in range(stage_count)
        )
        for j in range(count)
    ]


def challenge_to_hex(challenge: Sequence[int]) -> str:
    value = 0
    for bit in challenge:
        value = (value << 1) | (bit & 1)
    width = (len(challenge) + 3) // 4
    return f"{value:0{width}x}"


def hex_to_challenge(text: str, stage_count: int) -> tuple[int, ...]:
    value = int(text, 16)
    return tuple((value >> (stage_count - 1 - i)) & 1 for i in range(stage_count))


@dataclass
class DeltaDistribution:
    """Pooled raw_delta samples with summary statistics."""

    samples: list[float]
    mean: float
    std: float
    fraction_positive: float


def delta_distribution(
    pufs: Iterable[ArbiterPufInstance],
    challenge_set: Sequence[Sequence[int]],
    env: EnvCondition,
) -> DeltaDistribution:
    samples: list[float] = []
    for puf in pufs:
        table = _segment_delays(puf, env)
        for ch in challenge_set:
            top, bottom = _accumulate(table, ch)
            samples.append(top - bottom)
    n = len(samples)
    mean = sum(samples) / n
    var = sum((x - mean) ** 2 for x in samples) / n
    frac_pos = sum(1 for x in samples if x > 0) / n
    return DeltaDistribution(samples, mean, var**0.5, frac_pos)


@dataclass
class CrpDataset:
    """CRP evaluations: same challenge list, repeated under drawn noise."""

    stage_count: int
    challenges: list[tuple[int, ...]]
    # responses[(chip_id, repeat_id)] = bit list aligned with challenges
    responses: dict[tuple[int, int], list[int]]

    def chips(self) -> list[int]:
        return sorted({c for c, _ in self.responses})

    def repeats(self, chip_id: int) -> list[int]:
        return sorted(r for c, r in self.responses if c == chip_id)


def draw_env(
    noise: EnvNoiseSpec, seed: int, *labels, vdd_nominal: float = 1.0
) -> EnvCondition:
    """Environmental operating point for one evaluation pass."""
    uv = rngstream.uniform(seed, "env-vdd", *labels)
    ut = rngstream.uniform(seed, "env-temp", *labels)
    vdd = vdd_nominal * (1.0 + noise.vdd_fraction * (2.0 * uv - 1.0))
    temp = noise.temp_min_k + ut * (noise.temp_max_k - noise.temp_min_k)
    return EnvCondition(vdd, 0.0, temp)


def crp_dataset(
    pufs: Sequence[ArbiterPufInstance],
    n_challenges: int,
    n_repeats: int,
    env_noise: EnvNoiseSpec,
    seed: int,
    challenges: Sequence[Sequence[int]] | None = None,
) -> CrpDataset:
    """Evaluate a seeded challenge list n_repeats times per chip, each
    repeat under an independently drawn environment."""
    if n_challenges < 1:
        raise ValueError("n_challenges must be >= 1")
    if n_repeats < 2:
        raise ValueError("n_repeats must be >= 2")
    stage_count = pufs[0].stage_count
    if challenges is None:
        challenges = sample_challenges(stage_count, n_challenges, seed)
    challenges = [tuple(c) for c in challenges]
    responses: dict[tuple[int, int], list[int]] = {}
    for chip_id, puf in enumerate(pufs):
        for rep in range(n_repeats):
            env = draw_env(env_noise, seed, chip_id, rep)
            table = _segment_delays(puf, env)
            bits = []
            for ci, ch in enumerate(challenges):
                ev_seed = rngstream.hash_u64(seed, "eval", chip_id, rep, ci)
                rec = evaluate(
                    puf, ch, env, ev_seed,
                    jitter_rel=env_noise.eval_jitter_rel, _table=table,
                )
                bits.append(rec.response)
            responses[(chip_id, rep)] = bits
    return CrpDataset(stage_count, challenges, responses)


def write_crp_dataset(dataset: CrpDataset, path: str | Path) -> None:
    """One record per line: chip_id, repeat_id, challenge hex, response."""
    try:
        lines = []
        for (chip_id, rep), bits in sorted(dataset.responses.items()):
            for ch, bit in zip(dataset.challenges, bits):
                lines.append(f"{chip_id} {rep} {challenge_to_hex(ch)} {bit}\n")
        Path(path).write_text("".join(lines), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"failed writing CRP dataset to {path}: {exc}") from exc


def read_crp_dataset(path: str | Path, stage_count: int) -> CrpDataset:
    responses: dict[tuple[int, int], list[int]] = {}
    challenges: list[tuple[int, ...]] = []
    first_key: tuple[int, int] | None = None
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                chip_s, rep_s, ch_hex, bit_s = line.split()
                key = (int(chip_s), int(rep_s))
                if first_key is None:
                    first_key = key
                if key == first_key:
                    challenges.append(hex_to_challenge(ch_hex, stage_count))
                responses.setdefault(key, []).append(int(bit_s))
    except OSError as exc:
        raise OSError(f"failed reading CRP dataset from {path}: {exc}") from exc
    return CrpDataset(stage_count, challenges, responses)
