"""Behavioral delay and aging models for inverter and Schmitt-trigger gates.

Delay follows the alpha-power law, per output transition:

    d = k * C * V_sw / (V_sw - V_TH,eff)^alpha,   V_sw = vdd - vss

The falling transition uses the pull-down threshold, the rising one the
pull-up threshold, and the stage delay is the mean of the two (a ring
oscillator period sums both transitions anyway).

A Schmitt trigger is modeled with composite thresholds that capture the
2-stack plus feedback contention of the six-transistor cell:

    V_TH,PD = V_TH(N0) + V_TH(N1) + eta * V_TH(N2)
    V_TH,PU = V_TH(P0) + V_TH(P1) + eta * V_TH(P2)

where eta is the feedback-contention gain. The composite threshold sits much
closer to the rail swing than a single inverter threshold, which is what
makes the ST delay hypersensitive to threshold shifts from aging or process.

Aging accrues as a power law in cumulative stress time, exponential in
stress overdrive for BTI; shifts are recomputed from total stressed seconds
so that splitting a stress interval is bit-identical to one interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from stpuf.errors import GateStalledError

INVERTER = "inverter"
SCHMITT_TRIGGER = "st"

BTI = "bti"
HCI = "hci"

# +300 mV added on top of nominal V_TH for high-V_TH devices.
HIGH_VTH_OFFSET_V = 0.300

# All delay evaluation is referenced to this temperature.
TEMP_REF_K = 298.0


@dataclass(frozen=True)
class TransistorParams:
    """Per-device threshold state. Immutable; aging returns a new record."""

    vth_nominal: float          # V
    vth_intra: float = 0.0      # V, die-specific random shift
    is_high_vth: bool = False   # adds HIGH_VTH_OFFSET_V
    bti_seconds: float = 0.0    # cumulative BTI stress time, s
    hci_seconds: float = 0.0    # cumulative HCI stress time, s
    vth_aging_bti: float = 0.0  # V, accrued BTI shift (>= 0)
    vth_aging_hci: float = 0.0  # V, accrued HCI shift (>= 0)

    @property
    def vth_aging(self) -> float:
        """Total accrued aging shift, V. Never decreases over a lifetime."""
        return self.vth_aging_bti + self.vth_aging_hci


@dataclass(frozen=True)
class EnvCondition:
    """Operating point: supply rails and temperature."""

    vdd: float                  # V
    vss: float = 0.0            # V, may be negative under boost
    temperature: float = TEMP_REF_K  # K

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0 K, got {self.temperature}")
        if self.vdd <= self.vss:
            raise ValueError(f"vdd ({self.vdd}) must exceed vss ({self.vss})")

    @property
    def swing(self) -> float:
        return self.vdd - self.vss


@dataclass(frozen=True)
class GateParams:
    """One gate instance: device thresholds plus fitted drive constants.

    Transistor order is (P0, N0) for an inverter and
    (P0, P1, P2, N0, N1, N2) for a Schmitt trigger, with P2/N2 the feedback
    devices. feedback_eta and vth_tempco are config constants carried here by
    the gate builders so delay evaluation stays a pure function of
    (gate, env).
    """

    kind: str
    transistors: tuple[TransistorParams, ...]
    load_cap: float             # F
    drive_constant: float       # s*V^(alpha-1)/F, fitted k
    alpha: float                # velocity-saturation exponent
    feedback_eta: float = 0.0   # ST feedback-contention gain
    vth_tempco: float = 0.0     # V/K, linear V_TH(T) coefficient

    def __post_init__(self):
        expected = {INVERTER: 2, SCHMITT_TRIGGER: 6}.get(self.kind)
        if expected is None:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.transistors) != expected:
            raise ValueError(
                f"{self.kind} gate needs {expected} transistors, got {len(self.transistors)}"
            )
        if self.load_cap <= 0:
            raise ValueError(f"load_cap must be > 0, got {self.load_cap}")
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in [1.0, 2.0], got {self.alpha}")


@dataclass(frozen=True)
class AgingModelParams:
    """Calibrated BTI/HCI accrual constants (see default config)."""

    bti_prefactor: float        # V
    bti_time_exponent: float
    bti_voltage_gamma: float    # 1/V
    hci_prefactor: float        # V
    hci_time_exponent: float
    hci_slew_gain: float        # extra HCI weight for ST gates
    reference_stress_voltage: float  # V, swing at which BTI prefactor applies

    def __post_init__(self):
        if self.bti_prefactor < 0 or self.hci_prefactor < 0:
            raise ValueError("aging prefactors must be >= 0")
        for name in ("bti_time_exponent", "hci_time_exponent"):
            n = getattr(self, name)
            if not 0.0 < n < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {n}")


def effective_vth(t: TransistorParams) -> float:
    """Effective threshold: nominal + high-V_TH offset + intra + aging, V."""
    offset = HIGH_VTH_OFFSET_V if t.is_high_vth else 0.0
    return t.vth_nominal + offset + t.vth_intra + t.vth_aging


def _vth_at(t: TransistorParams, gate: GateParams, env: EnvCondition) -> float:
    """Effective threshold at an operating point (linear V_TH(T) shift)."""
    vth = effective_vth(t) + gate.vth_tempco * (env.temperature - TEMP_REF_K)
    if not 0.0 < vth < env.swing:
        raise ValueError(
            f"effective V_TH {vth:.4f} V outside (0, {env.swing:.4f}) at this operating point"
        )
    return vth


def _transition_delay(gate: GateParams, env: EnvCondition, vth_composite: float) -> float:
    overdrive = env.swing - vth_composite
    if overdrive <= 0.0:
        raise GateStalledError(
            f"gate stalled: composite V_TH {vth_composite:.4f} V >= swing {env.swing:.4f} V"
        )
    return gate.drive_constant * gate.load_cap * env.swing / overdrive**gate.alpha


def composite_thresholds(gate: GateParams, env: EnvCondition) -> tuple[float, float]:
    """(pull-up, pull-down) composite thresholds at the operating point, V."""
    if gate.kind == INVERTER:
        p0, n0 = gate.transistors
        return _vth_at(p0, gate, env), _vth_at(n0, gate, env)
    p0, p1, p2, n0, n1, n2 = gate.transistors
    eta = gate.feedback_eta
    pu = _vth_at(p0, gate, env) + _vth_at(p1, gate, env) + eta * _vth_at(p2, gate, env)
    pd = _vth_at(n0, gate, env) + _vth_at(n1, gate, env) + eta * _vth_at(n2, gate, env)
    return pu, pd


def gate_delay(gate: GateParams, env: EnvCondition) -> float:
    """Mean of rise and fall propagation delays, seconds."""
    vth_pu, vth_pd = composite_thresholds(gate, env)
    rise = _transition_delay(gate, env, vth_pu)
    fall = _transition_delay(gate, env, vth_pd)
    return 0.5 * (rise + fall)


@dataclass(frozen=True)
class DeviceConstants:
    """Config-backed constants shared by all gate builders.

    Transistor sizing never appears explicitly; all W/L effects are folded
    into drive_constant.
    """

    vth_nominal: float = 0.30           # V
    high_vth_offset: float = HIGH_VTH_OFFSET_V  # V, fixed
    drive_constant: float = 5000.0      # s*V^(alpha-1)/F
    alpha: float = 1.3
    feedback_eta: float = 0.05
    load_cap: float = 2.0e-15           # F
    vth_tempco: float = -2.0e-4         # V/K
    delta_vth_sweep_max: float = 0.145  # V, documented Fig-2(b)-style sweep top


def inverter(
    consts: DeviceConstants,
    shifts: tuple[float, float] = (0.0, 0.0),
    high_vth: bool = False,
    load_cap: float | None = None,
) -> GateParams:
    """Build an inverter gate; shifts are (P0, N0) intra-die V_TH shifts."""
    devs = tuple(
        TransistorParams(consts.vth_nominal, vth_intra=s, is_high_vth=high_vth)
        for s in shifts
    )
    return GateParams(
        kind=INVERTER,
        transistors=devs,
        load_cap=consts.load_cap if load_cap is None else load_cap,
        drive_constant=consts.drive_constant,
        alpha=consts.alpha,
        feedback_eta=consts.feedback_eta,
        vth_tempco=consts.vth_tempco,
    )


def schmitt_trigger(
    consts: DeviceConstants,
    shifts: tuple[float, ...] = (0.0,) * 6,
    high_vth: bool = False,
    load_cap: float | None = None,
) -> GateParams:
    """Build an ST gate; shifts follow the (P0, P1, P2, N0, N1, N2) order.

    The high-V_TH flavor flags only the feedback pair (P2, N2): raising all
    six devices by the 300 mV offset would push the composite threshold past
    the 1 V sensing swing and stall the gate.
    """
    if len(shifts) != 6:
        raise ValueError(f"ST gate needs 6 shifts, got {len(shifts)}")
    feedback = (2, 5)
    devs = tuple(
        TransistorParams(
            consts.vth_nominal,
            vth_intra=s,
            is_high_vth=high_vth and i in feedback,
        )
        for i, s in enumerate(shifts)
    )
    return GateParams(
        kind=SCHMITT_TRIGGER,
        transistors=devs,
        load_cap=consts.load_cap if load_cap is None else load_cap,
        drive_constant=consts.drive_constant,
        alpha=consts.alpha,
        feedback_eta=consts.feedback_eta,
        vth_tempco=consts.vth_tempco,
    )


def build_gate(
    kind: str,
    consts: DeviceConstants,
    shifts: tuple[float, ...],
    high_vth: bool = False,
    load_cap: float | None = None,
) -> GateParams:
    if kind == INVERTER:
        return inverter(consts, shifts, high_vth=high_vth, load_cap=load_cap)  # type: ignore[arg-type]
    if kind == SCHMITT_TRIGGER:
        return schmitt_trigger(consts, shifts, high_vth=high_vth, load_cap=load_cap)
    raise ValueError(f"unknown gate kind {kind!r}")


def transistor_count(kind: str) -> int:
    return {INVERTER: 2, SCHMITT_TRIGGER: 6}[kind]


def sensitivity_ratio(
    delta_vth: float, env: EnvCondition, consts: DeviceConstants
) -> float:
    """ST-vs-inverter delay sensitivity at a shared threshold shift.

    Returns [d_ST(dV)/d_ST(0)] / [d_inv(dV)/d_inv(0)] for nominal gates with
    delta_vth added to every transistor, mimicking uniform aging.
    """
    if delta_vth < 0:
        raise ValueError(f"delta_vth must be >= 0, got {delta_vth}")
    inv0 = inverter(consts)
    st0 = schmitt_trigger(consts)
    inv_d = inverter(consts, shifts=(delta_vth, delta_vth))
    st_d = schmitt_trigger(consts, shifts=(delta_vth,) * 6)
    inv_ratio = gate_delay(inv_d, env) / gate_delay(inv0, env)
    st_ratio = gate_delay(st_d, env) / gate_delay(st0, env)
    return st_ratio / inv_ratio


def accrue_aging(
    t: TransistorParams,
    stress_env: EnvCondition,
    duration: float,
    model: AgingModelParams,
    mechanism: str,
    st_gate: bool = False,
) -> TransistorParams:
    """Accrue one mechanism's stress time and recompute its shift.

    Shifts are recomputed from cumulative stressed seconds (power law), so
    splitting an interval yields bit-identical results to one interval. A
    recomputed shift never decreases (no recovery is modeled); if rails
    change between calls the accumulated time is priced at the latest rails,
    floored at the previously accrued shift.
    """
    if duration < 0:
        raise ValueError(f"stress duration must be >= 0, got {duration}")
    if mechanism == BTI:
        total = t.bti_seconds + duration
        accel = math.exp(
            model.bti_voltage_gamma * (stress_env.swing - model.reference_stress_voltage)
        )
        shift = model.bti_prefactor * accel * total**model.bti_time_exponent
        return replace(
            t, bti_seconds=total, vth_aging_bti=max(t.vth_aging_bti, shift)
        )
    if mechanism == HCI:
        total = t.hci_seconds + duration
        gain = 1.0 + (model.hci_slew_gain if st_gate else 0.0)
        shift = model.hci_prefactor * gain * total**model.hci_time_exponent
        return replace(
            t, hci_seconds=total, vth_aging_hci=max(t.vth_aging_hci, shift)
        )
    raise ValueError(f"unknown aging mechanism {mechanism!r}")
