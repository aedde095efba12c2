"""PUF quality metrics: inter/intra-die Hamming distance and uniformity.

Intra-die HD (reliability, ideal 0) pools the pairwise normalized HD between
repeated readings of each chip; inter-die HD (uniqueness, ideal 0.5) pools
pairwise normalized HD between different chips' first readings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

from stpuf.arbiter import CrpDataset

INTRA = "intra"
INTER = "inter"


@dataclass(frozen=True)
class HdReport:
    mean: float          # fraction of response length
    sigma: float         # std of the pooled pairwise HDs
    sample_count: int    # number of pairwise comparisons
    kind: str

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError(f"mean HD must lie in [0, 1], got {self.mean}")


def hamming_distance(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(1 for x, y in zip(a, b) if x != y)


def _report(samples: list[float], kind: str) -> HdReport:
    n = len(samples)
    mean = sum(samples) / n
    var = sum((x - mean) ** 2 for x in samples) / n
    return HdReport(mean=mean, sigma=math.sqrt(var), sample_count=n, kind=kind)


def intra_hd(dataset: CrpDataset) -> HdReport:
    """Pairwise HD between repeats of the same chip, pooled over chips."""
    samples: list[float] = []
    for chip in dataset.chips():
        reps = dataset.repeats(chip)
        if len(reps) < 2:
            raise ValueError(f"chip {chip} has fewer than 2 repeats")
        for r1, r2 in combinations(reps, 2):
            a = dataset.responses[(chip, r1)]
            b = dataset.responses[(chip, r2)]
            samples.append(hamming_distance(a, b) / len(a))
    return _report(samples, INTRA)


def inter_hd(dataset: CrpDataset) -> HdReport:
    """Pairwise HD between distinct chips' first-repeat responses."""
    chips = dataset.chips()
    if len(chips) < 2:
        raise ValueError("inter-die HD needs at least 2 chips")
    first = {c: dataset.responses[(c, dataset.repeats(c)[0])] for c in chips}
    samples = [
        hamming_distance(first[c1], first[c2]) / len(first[c1])
        for c1, c2 in combinations(chips, 2)
    ]
    return _report(samples, INTER)


def read_bitfile(path: str | Path) -> list[int]:
    """Read a raw bit-file ('0'/'1' characters, whitespace ignored)."""
    text = Path(path).read_text(encoding="utf-8")
    return [int(ch) for ch in text if ch in "01"]
