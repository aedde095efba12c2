"""Experiment configuration: a strict, versioned JSON document.

Every constant consumed anywhere in the engine lives here; parsing rejects
unknown or missing keys so constants cannot drift silently. The config hash
embedded in result files covers every consumed section (everything except
the informational `provenance` block and the `output` section).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from stpuf import devices
from stpuf.arbiter import EnvNoiseSpec
from stpuf.devices import AgingModelParams, DeviceConstants, EnvCondition
from stpuf.errors import ConfigError
from stpuf.population import VariationSpec
from stpuf.sensor import SensorConfig
from stpuf.sram import NoiseSpec

_SCHEMA: dict[str, set[str]] = {
    "device": {
        "vth_nominal_v", "high_vth_offset_v", "drive_constant", "alpha",
        "feedback_eta", "load_cap_f", "vth_tempco_v_per_k",
        "delta_vth_sweep_max_v",
    },
    "variation": {"vth_sigma_v", "vth_mean_v", "sample_count"},
    "aging": {
        "bti_prefactor_v", "bti_time_exponent", "bti_voltage_gamma_per_v",
        "hci_prefactor_v", "hci_time_exponent", "hci_slew_gain",
        "reference_stress_voltage_v",
    },
    "sensor": {
        "stage_count", "stress_vdd_v", "stress_vss_v", "sense_vdd_v",
        "sense_vss_v", "timer_window_s", "trim_quantum_f", "max_trim_quanta",
        "usages_s", "stress_ripple_v",
    },
    "arbiter": {
        "stage_counts", "setup_window_s", "hd_stage_count", "hd_repeats",
        "hd_challenges", "delta_challenges",
    },
    "arbiter_noise": {
        "vdd_fraction", "temp_min_k", "temp_max_k", "eval_jitter_rel",
    },
    "sram": {
        "rows", "cols", "cycles", "latch_strength_v", "mtj_strength_v",
        "vdd_grid_v", "comparison_vdd_v", "hardest_vdd_v",
    },
    "sram_noise": {
        "sigma0_v", "voltage_gain_v_per_v", "temperature_gain_v_per_k",
        "vdd_nominal_v",
    },
    "nist": {"stream_bits", "trials", "puf_chips", "puf_challenges"},
    "output": {"directory", "figures"},
}
_TOP_KEYS = {"version", "master_seed", *_SCHEMA, "provenance"}

# Sensor design variants in the order of increasing capability (Fig-4 style):
# (gate kind, high_vth, calibrated, boosted stress rails).
SENSOR_VARIANTS: dict[str, tuple[str, bool, bool, bool]] = {
    "inv-uncal": (devices.INVERTER, False, False, False),
    "inv-cal": (devices.INVERTER, False, True, False),
    "inv-hv-cal": (devices.INVERTER, True, True, False),
    "st-hv-cal-boost": (devices.SCHMITT_TRIGGER, True, True, True),
}


@dataclass(frozen=True)
class SensorSettings:
    stage_count: int
    stress_rails: EnvCondition
    sense_rails: EnvCondition
    timer_window: float
    trim_quantum: float
    max_trim_quanta: int
    usages_s: tuple[float, ...]
    stress_ripple_v: float


@dataclass(frozen=True)
class ArbiterSettings:
    stage_counts: tuple[int, ...]
    setup_window: float
    hd_stage_count: int
    hd_repeats: int
    hd_challenges: int
    delta_challenges: int


@dataclass(frozen=True)
class SramSettings:
    rows: int
    cols: int
    cycles: int
    latch_strength: float
    mtj_strength: float
    vdd_grid: tuple[float, ...]
    comparison_vdd: float
    hardest_vdd: float


@dataclass(frozen=True)
class NistSettings:
    stream_bits: int
    trials: int
    puf_chips: int
    puf_challenges: int


@dataclass(frozen=True)
class OutputSettings:
    directory: str
    figures: bool


@dataclass(frozen=True)
class ExperimentConfig:
    version: int
    master_seed: int
    device: DeviceConstants
    variation: VariationSpec
    aging: AgingModelParams
    sensor: SensorSettings
    arbiter: ArbiterSettings
    arbiter_noise: EnvNoiseSpec
    sram: SramSettings
    sram_noise: NoiseSpec
    nist: NistSettings
    output: OutputSettings
    raw: dict

    def sensor_config(self, variant: str) -> SensorConfig:
        if variant not in SENSOR_VARIANTS:
            raise ConfigError(
                f"unknown sensor variant {variant!r}; known: {sorted(SENSOR_VARIANTS)}"
            )
        kind, high_vth, calibrated, boosted = SENSOR_VARIANTS[variant]
        s = self.sensor
        return SensorConfig(
            stress_rails=s.stress_rails if boosted else s.sense_rails,
            sense_rails=s.sense_rails,
            timer_window=s.timer_window,
            trim_quantum=s.trim_quantum,
            gate_kind=kind,
            high_vth=high_vth,
            calibrated=calibrated,
            stage_count=s.stage_count,
            max_trim_quanta=s.max_trim_quanta,
            stress_ripple_v=s.stress_ripple_v,
        )

    def hash(self) -> str:
        return config_hash(self.raw)


def _check_keys(section: str, data: dict, allowed: set[str]) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    missing = allowed - set(data)
    if missing:
        raise ConfigError(f"missing keys in [{section}]: {sorted(missing)}")


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    missing = (_TOP_KEYS - {"provenance"}) - set(doc)
    if missing:
        raise ConfigError(f"missing top-level keys: {sorted(missing)}")
    for section, keys in _SCHEMA.items():
        if not isinstance(doc[section], dict):
            raise ConfigError(f"[{section}] must be an object")
        _check_keys(section, doc[section], keys)

    d, v, a = doc["device"], doc["variation"], doc["aging"]
    sn, ar, an = doc["sensor"], doc["arbiter"], doc["arbiter_noise"]
    sr, srn, ni, out = doc["sram"], doc["sram_noise"], doc["nist"], doc["output"]
    try:
        device = DeviceConstants(
            vth_nominal=d["vth_nominal_v"],
            high_vth_offset=d["high_vth_offset_v"],
            drive_constant=d["drive_constant"],
            alpha=d["alpha"],
            feedback_eta=d["feedback_eta"],
            load_cap=d["load_cap_f"],
            vth_tempco=d["vth_tempco_v_per_k"],
            delta_vth_sweep_max=d["delta_vth_sweep_max_v"],
        )
        if device.high_vth_offset != devices.HIGH_VTH_OFFSET_V:
            raise ConfigError(
                "high_vth_offset_v is fixed at "
                f"{devices.HIGH_VTH_OFFSET_V} (got {device.high_vth_offset})"
            )
        variation = VariationSpec(
            vth_sigma=v["vth_sigma_v"],
            vth_mean=v["vth_mean_v"],
            sample_count=v["sample_count"],
            master_seed=doc["master_seed"],
        )
        aging = AgingModelParams(
            bti_prefactor=a["bti_prefactor_v"],
            bti_time_exponent=a["bti_time_exponent"],
            bti_voltage_gamma=a["bti_voltage_gamma_per_v"],
            hci_prefactor=a["hci_prefactor_v"],
            hci_time_exponent=a["hci_time_exponent"],
            hci_slew_gain=a["hci_slew_gain"],
            reference_stress_voltage=a["reference_stress_voltage_v"],
        )
        sensor = SensorSettings(
            stage_count=sn["stage_count"],
            stress_rails=EnvCondition(sn["stress_vdd_v"], sn["stress_vss_v"]),
            sense_rails=EnvCondition(sn["sense_vdd_v"], sn["sense_vss_v"]),
            timer_window=sn["timer_window_s"],
            trim_quantum=sn["trim_quantum_f"],
            max_trim_quanta=sn["max_trim_quanta"],
            usages_s=tuple(sn["usages_s"]),
            stress_ripple_v=sn["stress_ripple_v"],
        )
        arbiter = ArbiterSettings(
            stage_counts=tuple(ar["stage_counts"]),
            setup_window=ar["setup_window_s"],
            hd_stage_count=ar["hd_stage_count"],
            hd_repeats=ar["hd_repeats"],
            hd_challenges=ar["hd_challenges"],
            delta_challenges=ar["delta_challenges"],
        )
        arbiter_noise = EnvNoiseSpec(
            vdd_fraction=an["vdd_fraction"],
            temp_min_k=an["temp_min_k"],
            temp_max_k=an["temp_max_k"],
            eval_jitter_rel=an["eval_jitter_rel"],
        )
        sram_settings = SramSettings(
            rows=sr["rows"],
            cols=sr["cols"],
            cycles=sr["cycles"],
            latch_strength=sr["latch_strength_v"],
            mtj_strength=sr["mtj_strength_v"],
            vdd_grid=tuple(sr["vdd_grid_v"]),
            comparison_vdd=sr["comparison_vdd_v"],
            hardest_vdd=sr["hardest_vdd_v"],
        )
        sram_noise = NoiseSpec(
            sigma0=srn["sigma0_v"],
            voltage_gain=srn["voltage_gain_v_per_v"],
            temperature_gain=srn["temperature_gain_v_per_k"],
            vdd_nominal=srn["vdd_nominal_v"],
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    return ExperimentConfig(
        version=doc["version"],
        master_seed=doc["master_seed"],
        device=device,
        variation=variation,
        aging=aging,
        sensor=sensor,
        arbiter=arbiter,
        arbiter_noise=arbiter_noise,
        sram=sram_settings,
        sram_noise=sram_noise,
        nist=NistSettings(
            stream_bits=ni["stream_bits"], trials=ni["trials"],
            puf_chips=ni["puf_chips"], puf_challenges=ni["puf_challenges"],
        ),
        output=OutputSettings(directory=out["directory"], figures=out["figures"]),
        raw=doc,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def default_config_dict() -> dict:
    text = resources.files("stpuf").joinpath("default_config.json").read_text("utf-8")
    return json.loads(text)


def default_config() -> ExperimentConfig:
    return parse_config(default_config_dict())


def save_config(doc: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def config_hash(doc: dict) -> str:
    """Hash of every consumed constant (provenance/output excluded)."""
    consumed = {k: v for k, v in doc.items() if k not in ("provenance", "output")}
    blob = json.dumps(consumed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
