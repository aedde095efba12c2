"""Deterministic keyed random streams.

Every random draw in the engine is a pure function of the master seed and a
label path, so results are reproducible bit-for-bit and order-independent:
adding a circuit (new label) never perturbs draws for existing labels.

Two flavors are provided:

* keyed scalar draws (blake2b hash -> u64 -> uniform -> inverse normal CDF),
  used where order independence per label matters (per-device process shifts,
  per-event noise);
* a Philox counter-based numpy generator for bulk i.i.d. arrays drawn in a
  fixed documented order (SRAM fault sweeps, NIST trial bitstreams).
"""

from __future__ import annotations

import hashlib
from statistics import NormalDist

import numpy as np

_NORMAL = NormalDist()
_TWO64 = float(2**64)


def _key_bytes(seed: int) -> bytes:
    return int(seed).to_bytes(8, "little", signed=False)


def hash_u64(seed: int, *labels) -> int:
    """64-bit digest of (seed, labels). Labels are joined with '/' so the
    mapping is stable across runs and platforms."""
    msg = "/".join(str(p) for p in labels).encode("utf-8")
    h = hashlib.blake2b(msg, digest_size=8, key=_key_bytes(seed))
    return int.from_bytes(h.digest(), "little")


def uniform(seed: int, *labels) -> float:
    """Uniform draw in the open interval (0, 1)."""
    return (hash_u64(seed, *labels) + 0.5) / _TWO64


def normal(seed: int, *labels, mu: float = 0.0, sigma: float = 1.0) -> float:
    """Gaussian draw via inverse CDF of the keyed uniform (no rejection)."""
    return mu + sigma * _NORMAL.inv_cdf(uniform(seed, *labels))


def coin(seed: int, *labels) -> int:
    """Fair coin: 0 or 1."""
    return hash_u64(seed, *labels) & 1


def philox(seed: int, *labels) -> np.random.Generator:
    """Counter-based generator for bulk array draws.

    The key is derived from (seed, labels); callers must draw arrays in a
    fixed order for reproducibility.
    """
    key = hash_u64(seed, "philox", *labels)
    return np.random.Generator(np.random.Philox(key=key))
