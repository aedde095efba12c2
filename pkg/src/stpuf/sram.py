"""Power-up models for 6T, 8T (latch-reinforced) and 7T NV (MTJ-reinforced)
SRAM PUF bitcells.

A bitcell is reduced to a signed skew s (composite mismatch of its four core
transistors) plus zero-mean Gaussian read noise whose sigma grows as V_DD
drops or temperature rises; the power-up state is sign(s + noise).
Reinforcement (the 8T back-to-back PMOS latch, or a programmed MTJ pulling
the recorded '0' side) adds a fixed offset toward the registered bit, which
is what buys robustness under voltage/temperature stress.

Protocol signals (LE for the 8T latch, EN for the 7T MTJ mux) are explicit
cell state so illegal sequences can be rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from stpuf import rngstream
from stpuf.devices import TEMP_REF_K, EnvCondition
from stpuf.errors import ProtocolError
from stpuf.population import VariationSpec, device_shift

SIX_T = "6t"
EIGHT_T = "8t"
SEVEN_T_NV = "7t"
KINDS = (SIX_T, EIGHT_T, SEVEN_T_NV)

MTJ_UNPROGRAMMED = "unprogrammed"
MTJ_LOW_ON_LEFT = "low_on_left"
MTJ_LOW_ON_RIGHT = "low_on_right"

_CELL_DEVICES = ("pl", "pr", "nl", "nr")


@dataclass(frozen=True)
class NoiseSpec:
    """Read-noise sigma as a function of the operating point."""

    sigma0: float = 0.02            # V at nominal V_DD
    voltage_gain: float = 0.15      # V per V of V_DD reduction
    temperature_gain: float = 2.0e-4  # V per K above 298 K
    vdd_nominal: float = 1.0        # V

    def sigma_n(self, env: EnvCondition) -> float:
        sigma = (
            self.sigma0
            + self.voltage_gain * max(0.0, self.vdd_nominal - env.vdd)
            + self.temperature_gain * max(0.0, env.temperature - TEMP_REF_K)
        )
        if sigma < 0:
            raise ValueError(f"noise sigma is negative ({sigma}) at {env}")
        return sigma


@dataclass(frozen=True)
class BitcellParams:
    """One bitcell: kind, mismatch skew, reinforcement state."""

    kind: str
    skew: float                      # V, (V_TH,PR - V_TH,PL) + (V_TH,NL - V_TH,NR)
    latch_strength: float = 0.0      # r8, 8T only
    mtj_strength: float = 0.0        # r7, 7T only
    registered_bit: int | None = None
    latch_enabled: bool = False      # 8T: LE pulled low
    mtj_state: str = MTJ_UNPROGRAMMED  # 7T
    mux_enabled: bool = False        # 7T: EN gating the MTJ path

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bitcell kind {self.kind!r}")
        if self.latch_strength < 0 or self.mtj_strength < 0:
            raise ValueError("reinforcement strengths must be >= 0")


def reinforcement(cell: BitcellParams) -> float:
    """Skew offset contributed by the active reinforcement path, V."""
    if cell.kind == EIGHT_T and cell.latch_enabled and cell.registered_bit is not None:
        return cell.latch_strength if cell.registered_bit else -cell.latch_strength
    if cell.kind == SEVEN_T_NV and cell.mux_enabled:
        if cell.mtj_state == MTJ_LOW_ON_RIGHT:
            return cell.mtj_strength
        if cell.mtj_state == MTJ_LOW_ON_LEFT:
            return -cell.mtj_strength
    return 0.0


def power_up(cell: BitcellParams, env: EnvCondition, noise: NoiseSpec, seed: int) -> int:
    """Power-up state: 1 iff skew + reinforcement + noise > 0 (tie -> 0)."""
    s_eff = cell.skew + reinforcement(cell)
    n = rngstream.normal(seed, "powerup", sigma=noise.sigma_n(env))
    return 1 if s_eff + n > 0 else 0


def register_8t(
    cell: BitcellParams, env: EnvCondition, noise: NoiseSpec, seed: int
) -> BitcellParams:
    """8T registration: read once with LE high (latch off), then enable the
    latch so later power-ups are pulled toward the recorded bit."""
    if cell.kind != EIGHT_T:
        raise ValueError(f"register_8t requires an 8T cell, got {cell.kind}")
    bare = replace(cell, latch_enabled=False, registered_bit=None)
    bit = power_up(bare, env, noise, seed)
    return replace(cell, registered_bit=bit, latch_enabled=True)


def program_mtj(
    cell: BitcellParams, env: EnvCondition, noise: NoiseSpec, seed: int
) -> BitcellParams:
    """7T MTJ programming: one unreinforced read (EN off), then the two-step
    write. A left node reading '0' leaves the low resistance on the left;
    re-powering with EN on pulls toward the recorded '0' side."""
    if cell.kind != SEVEN_T_NV:
        raise ValueError(f"program_mtj requires a 7T cell, got {cell.kind}")
    if cell.mtj_state != MTJ_UNPROGRAMMED:
        raise ProtocolError("MTJ already programmed (double programming)")
    bare = replace(cell, mux_enabled=False)
    bit = power_up(bare, env, noise, seed)
    state = MTJ_LOW_ON_RIGHT if bit == 1 else MTJ_LOW_ON_LEFT
    return replace(cell, registered_bit=bit, mtj_state=state, mux_enabled=True)


def register_cell(
    cell: BitcellParams, env: EnvCondition, noise: NoiseSpec, seed: int
) -> BitcellParams:
    """Kind-appropriate registration (6T just records its first read)."""
    if cell.kind == SIX_T:
        bit = power_up(cell, env, noise, seed)
        return replace(cell, registered_bit=bit)
    if cell.kind == EIGHT_T:
        return register_8t(cell, env, noise, seed)
    return program_mtj(cell, env, noise, seed)


@dataclass
class FaultReport:
    """Per-(V_DD, kind) bit-error counts over a power-cycled array."""

    vdd: float
    kind: str
    faults: int          # responses differing from the registered bit
    cells: int
    evaluations: int     # cells * cycles

    @property
    def fault_rate(self) -> float:
        return self.faults / self.evaluations


def cell_skew(variation: VariationSpec, chip_id: int, path: str) -> float:
    """Composite mismatch from the four sampled core-device shifts."""
    sh = {d: device_shift(variation, chip_id, f"{path}/{d}") for d in _CELL_DEVICES}
    return (sh["pr"] - sh["pl"]) + (sh["nl"] - sh["nr"])


def build_array(
    kind: str,
    rows: int,
    cols: int,
    variation: VariationSpec,
    latch_strength: float = 0.0,
    mtj_strength: float = 0.0,
    chip_id: int = 0,
    prefix: str = "sram",
) -> list[BitcellParams]:
    """One die's bitcell array; skews are reproducible per device path."""
    cells = []
    for r in range(rows):
        for c in range(cols):
            path = f"{prefix}/r{r:03d}c{c:03d}"
            cells.append(
                BitcellParams(
                    kind=kind,
                    skew=cell_skew(variation, chip_id, path),
                    latch_strength=latch_strength,
                    mtj_strength=mtj_strength,
                )
            )
    return cells


def _effective_skews(cells: Sequence[BitcellParams]) -> np.ndarray:
    return np.array([c.skew + reinforcement(c) for c in cells])


def register_array(
    cells: Sequence[BitcellParams],
    env: EnvCondition,
    noise: NoiseSpec,
    reg_noise: np.ndarray,
) -> list[BitcellParams]:
    """Vectorized registration with caller-supplied standard-normal draws
    (shared across kinds so comparisons are seed-paired)."""
    sigma = noise.sigma_n(env)
    skews = np.array([c.skew for c in cells])
    bits = (skews + sigma * reg_noise > 0).astype(int)
    out = []
    for cell, bit in zip(cells, bits):
        if cell.kind == SIX_T:
            out.append(replace(cell, registered_bit=int(bit)))
        elif cell.kind == EIGHT_T:
            out.append(replace(cell, registered_bit=int(bit), latch_enabled=True))
        else:
            if cell.mtj_state != MTJ_UNPROGRAMMED:
                raise ProtocolError("MTJ already programmed (double programming)")
            state = MTJ_LOW_ON_RIGHT if bit else MTJ_LOW_ON_LEFT
            out.append(
                replace(cell, registered_bit=int(bit), mtj_state=state, mux_enabled=True)
            )
    return out


def registered_bits(cells: Sequence[BitcellParams]) -> list[int]:
    bits = [c.registered_bit for c in cells]
    if any(b is None for b in bits):
        raise ValueError("array is not fully registered")
    return bits  # type: ignore[return-value]


def fault_sweep(
    arrays: dict[str, list[BitcellParams]],
    vdd_grid: Sequence[float],
    cycles: int,
    noise: NoiseSpec,
    seed: int,
    temperature: float = TEMP_REF_K,
) -> list[FaultReport]:
    """Power every cell `cycles` times at each V_DD and count mismatches
    against the registered bit.

    All kinds (and all grid points) share one standard-normal draw per
    (cycle, cell), scaled by the condition's sigma. That pairing makes the
    guarantees exact: a reinforced cell can only flip on draws that also
    flip its unreinforced twin, and lower V_DD (larger sigma) can only grow
    the flip set.
    """
    n_cells = {len(v) for v in arrays.values()}
    if len(n_cells) != 1:
        raise ValueError("all kinds must have equally sized arrays")
    count = n_cells.pop()

    reg_noise = rngstream.philox(seed, "sram-register").standard_normal(count)
    nominal = EnvCondition(noise.vdd_nominal, 0.0, temperature)
    registered = {
        kind: register_array(cells, nominal, noise, reg_noise)
        for kind, cells in arrays.items()
    }

    z = rngstream.philox(seed, "sram-sweep").standard_normal((cycles, count))
    reports = []
    for vdd in vdd_grid:
        env = EnvCondition(vdd, 0.0, temperature)
        sigma = noise.sigma_n(env)
        for kind, cells in registered.items():
            s_eff = _effective_skews(cells)
            golden = np.array(registered_bits(cells))
            responses = (s_eff[None, :] + sigma * z) > 0
            faults = int(np.count_nonzero(responses != golden[None, :].astype(bool)))
            reports.append(
                FaultReport(
                    vdd=vdd, kind=kind, faults=faults,
                    cells=count, evaluations=count * cycles,
                )
            )
    return reports


def uniformity(bits: Sequence[int]) -> float:
    """Fraction of ones in a registered response vector."""
    return sum(bits) / len(bits)


def write_fingerprint(bits: Sequence[int], path) -> None:
    """Registered fingerprint as a raw bit-file ('0'/'1' characters)."""
    from pathlib import Path

    Path(path).write_text("".join(str(int(b)) for b in bits) + "\n", encoding="utf-8")
