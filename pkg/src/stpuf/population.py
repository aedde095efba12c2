"""Deterministic Monte-Carlo chip populations with intra-die V_TH variation.

Each device shift is a pure function of (master_seed, chip_id, device-path),
so enumerating devices in a different order, or adding new circuits to the
manifest, never perturbs existing shifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from stpuf import rngstream


@dataclass(frozen=True)
class VariationSpec:
    """Intra-die V_TH shift distribution: Normal(vth_mean, vth_sigma)."""

    vth_sigma: float = 0.050    # V
    vth_mean: float = 0.0       # V
    sample_count: int = 500
    master_seed: int = 0

    def __post_init__(self):
        if self.vth_sigma < 0:
            raise ValueError(f"vth_sigma must be >= 0, got {self.vth_sigma}")
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")


@dataclass
class ChipInstance:
    """One Monte-Carlo die: every simulated device's intra-die shift."""

    chip_id: int
    device_shifts: dict[str, float] = field(default_factory=dict)

    def shift(self, path: str) -> float:
        return self.device_shifts[path]


def device_shift(spec: VariationSpec, chip_id: int, path: str) -> float:
    """Shift for one device, reproducible from (seed, chip_id, path)."""
    return rngstream.normal(
        spec.master_seed, "population", chip_id, path,
        mu=spec.vth_mean, sigma=spec.vth_sigma,
    )


def sample_population(
    spec: VariationSpec, circuit_manifest: Iterable[str]
) -> list[ChipInstance]:
    """Draw sample_count chips over the manifest's device paths."""
    paths = list(circuit_manifest)
    if not paths:
        raise ValueError("circuit manifest is empty")
    if len(set(paths)) != len(paths):
        raise ValueError("circuit manifest contains duplicate device paths")
    return [
        ChipInstance(
            chip_id=cid,
            device_shifts={p: device_shift(spec, cid, p) for p in paths},
        )
        for cid in range(spec.sample_count)
    ]


def export_population(chips: Iterable[ChipInstance], path: str | Path) -> None:
    """Write a columnar audit file: chip_id, device-path, shift."""
    lines = ["chip_id\tdevice_path\tshift_v\n"]
    for chip in chips:
        for dev, shift in chip.device_shifts.items():
            lines.append(f"{chip.chip_id}\t{dev}\t{shift!r}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def import_population(path: str | Path) -> list[ChipInstance]:
    """Read a file written by export_population."""
    chips: dict[int, ChipInstance] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip() != "chip_id\tdevice_path\tshift_v":
            raise ValueError(f"unrecognized population file header: {header!r}")
        for line in fh:
            cid_s, dev, shift_s = line.rstrip("\n").split("\t")
            cid = int(cid_s)
            chip = chips.setdefault(cid, ChipInstance(chip_id=cid))
            chip.device_shifts[dev] = float(shift_s)
    return [chips[cid] for cid in sorted(chips)]
