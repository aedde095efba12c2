"""Nine-test SP800-22 statistical subset over response bitstreams.

Tests: Frequency, Block Frequency, Runs, Longest Run of Ones, Cumulative
Sums, Spectral (DFT), Serial, Approximate Entropy, Non-overlapping Template.
Each returns exactly one p-value so the 9-row table is well defined:
Cumulative Sums reports the forward mode, Serial the first-difference
statistic, and the template test uses the single fixed template 000000001.

p-values use erfc and the regularized upper incomplete gamma function;
undersized inputs yield an "insufficient data" result rather than a crash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaincc

SIGNIFICANCE = 0.01

_PHI = NormalDist().cdf

# Longest-run-of-ones tiers: min n -> (block M, category floors, class probs).
_LONGEST_RUN_TIERS = (
    (750000, 10000, (10, 11, 12, 13, 14, 15, 16),
     (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6272, 128, (4, 5, 6, 7, 8, 9),
     (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, (1, 2, 3, 4),
     (0.2148, 0.3672, 0.2305, 0.1875)),
)

_TEMPLATE = (0, 0, 0, 0, 0, 0, 0, 0, 1)  # fixed m=9 template
_TEMPLATE_BLOCKS = 8


@dataclass(frozen=True)
class NistResult:
    test_name: str
    p_value: float | None
    passed: bool
    note: str = ""


class InsufficientData(Exception):
    pass


def _as_bits(bits: Sequence[int]) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bitstream must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bitstream must contain only 0s and 1s")
    return arr


def _require(n: int, minimum: int, test: str) -> None:
    if n < minimum:
        raise InsufficientData(f"{test} needs >= {minimum} bits, got {n}")


def frequency(bits: np.ndarray) -> float:
    """Monobit test: p = erfc(|sum(2b-1)| / sqrt(2n))."""
    _require(bits.size, 100, "frequency")
    s = abs(int(2 * np.count_nonzero(bits)) - bits.size)
    return math.erfc(s / math.sqrt(2.0 * bits.size))


def block_frequency(bits: np.ndarray, block_size: int = 128) -> float:
    _require(bits.size, max(100, block_size), "block_frequency")
    n_blocks = bits.size // block_size
    blocks = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    pi = blocks.mean(axis=1)
    chi2 = 4.0 * block_size * float(np.sum((pi - 0.5) ** 2))
    return float(gammaincc(n_blocks / 2.0, chi2 / 2.0))


def runs(bits: np.ndarray) -> float:
    _require(bits.size, 100, "runs")
    n = bits.size
    pi = np.count_nonzero(bits) / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return 0.0  # frequency precondition failed; test fails by definition
    v = 1 + int(np.count_nonzero(np.diff(bits)))
    num = abs(v - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return math.erfc(num / den)


def _longest_run_of_ones(block: np.ndarray) -> int:
    padded = np.concatenate(([0], block, [0]))
    edges = np.flatnonzero(np.diff(padded))
    if edges.size == 0:
        return 0
    return int(np.max(edges[1::2] - edges[::2]))


def longest_run(bits: np.ndarray) -> float:
    _require(bits.size, 128, "longest_run")
    for min_n, block_size, floors, probs in _LONGEST_RUN_TIERS:
        if bits.size >= min_n:
            break
    n_blocks = bits.size // block_size
    blocks = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    longest = np.array([_longest_run_of_ones(b) for b in blocks])
    counts = np.zeros(len(floors))
    counts[0] = np.count_nonzero(longest <= floors[0])
    for i, v in enumerate(floors[1:-1], start=1):
        counts[i] = np.count_nonzero(longest == v)
    counts[-1] = np.count_nonzero(longest >= floors[-1])
    expected = n_blocks * np.asarray(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return float(gammaincc((len(floors) - 1) / 2.0, chi2 / 2.0))


def cumulative_sums(bits: np.ndarray, forward: bool = True) -> float:
    _require(bits.size, 100, "cumulative_sums")
    n = bits.size
    x = 2.0 * bits.astype(np.int64) - 1
    if not forward:
        x = x[::-1]
    z = float(np.max(np.abs(np.cumsum(x))))
    if z == 0.0:
        return 0.0
    sqrt_n = math.sqrt(n)
    total = 1.0
    for k in range(int((-n / z + 1) // 4), int((n / z - 1) // 4) + 1):
        total -= _PHI((4 * k + 1) * z / sqrt_n) - _PHI((4 * k - 1) * z / sqrt_n)
    for k in range(int((-n / z - 3) // 4), int((n / z - 1) // 4) + 1):
        total += _PHI((4 * k + 3) * z / sqrt_n) - _PHI((4 * k + 1) * z / sqrt_n)
    return min(max(total, 0.0), 1.0)


def spectral(bits: np.ndarray) -> float:
    """DFT test: fraction of low-frequency peaks under the 95% threshold."""
    _require(bits.size, 1000, "spectral")
    n = bits.size
    x = 2.0 * bits.astype(np.float64) - 1.0
    mods = np.abs(np.fft.rfft(x))[: n // 2]
    threshold = math.sqrt(math.log(1.0 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = int(np.count_nonzero(mods < threshold))
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    return math.erfc(abs(d) / math.sqrt(2.0))


def _pattern_counts(bits: np.ndarray, m: int) -> np.ndarray:
    """Overlapping m-bit pattern counts on the circularly extended stream."""
    ext = np.concatenate((bits, bits[: m - 1])) if m > 1 else bits
    words = np.zeros(bits.size, dtype=np.int64)
    for j in range(m):
        words = (words << 1) | ext[j : j + bits.size]
    return np.bincount(words, minlength=2**m)


def _psi_sq(bits: np.ndarray, m: int) -> float:
    if m == 0:
        return 0.0
    counts = _pattern_counts(bits, m)
    return float(2**m / bits.size * np.sum(counts.astype(np.float64) ** 2) - bits.size)


def serial(bits: np.ndarray, m: int = 8) -> float:
    """Serial test, first-difference statistic (nabla psi^2_m)."""
    _require(bits.size, 2 ** (m + 2), "serial")
    delta = _psi_sq(bits, m) - _psi_sq(bits, m - 1)
    return float(gammaincc(2 ** (m - 2), delta / 2.0))


def approximate_entropy(bits: np.ndarray, m: int = 2) -> float:
    _require(bits.size, 2 ** (m + 5), "approximate_entropy")
    n = bits.size

    def phi(mm: int) -> float:
        counts = _pattern_counts(bits, mm)
        c = counts[counts > 0].astype(np.float64) / n
        return float(np.sum(c * np.log(c)))

    apen = phi(m) - phi(m + 1)
    chi2 = 2.0 * n * (math.log(2.0) - apen)
    return float(gammaincc(2 ** (m - 1), chi2 / 2.0))


def non_overlapping_template(
    bits: np.ndarray, template: Sequence[int] = _TEMPLATE, n_blocks: int = _TEMPLATE_BLOCKS
) -> float:
    _require(bits.size, 1024, "non_overlapping_template")
    m = len(template)
    block_size = bits.size // n_blocks
    tmpl = np.asarray(template, dtype=np.uint8)
    mu = (block_size - m + 1) / 2.0**m
    var = block_size * (1.0 / 2.0**m - (2.0 * m - 1.0) / 2.0 ** (2 * m))
    chi2 = 0.0
    for b in range(n_blocks):
        block = bits[b * block_size : (b + 1) * block_size]
        windows = np.lib.stride_tricks.sliding_window_view(block, m)
        match_pos = np.flatnonzero(np.all(windows == tmpl, axis=1))
        count, next_free = 0, -1
        for pos in match_pos:  # non-overlapping scan: jump m on each match
            if pos >= next_free:
                count += 1
                next_free = pos + m
        chi2 += (count - mu) ** 2 / var
    return float(gammaincc(n_blocks / 2.0, chi2 / 2.0))


_TESTS: dict[str, Callable[[np.ndarray], float]] = {
    "frequency": frequency,
    "block_frequency": block_frequency,
    "runs": runs,
    "longest_run": longest_run,
    "cumulative_sums": cumulative_sums,
    "spectral": spectral,
    "serial": serial,
    "approximate_entropy": approximate_entropy,
    "non_overlapping_template": non_overlapping_template,
}

TEST_NAMES = tuple(_TESTS)


def nist_suite(
    bits: Sequence[int],
    tests: Sequence[str] | None = None,
    significance: float = SIGNIFICANCE,
) -> list[NistResult]:
    """Run the selected tests (default: all 9) and report p-values."""
    arr = _as_bits(bits)
    results = []
    for name in tests or TEST_NAMES:
        if name not in _TESTS:
            raise ValueError(f"unknown NIST test {name!r}")
        try:
            p = _TESTS[name](arr)
        except InsufficientData as exc:
            results.append(NistResult(name, None, False, note=str(exc)))
            continue
        results.append(NistResult(name, p, p >= significance))
    return results
