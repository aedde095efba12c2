import math
import statistics

import pytest

from stpuf.population import (
    VariationSpec,
    export_population,
    import_population,
    sample_population,
)

MANIFEST = [f"sensor/ro0/s{i:02d}/t{t}" for i in range(4) for t in range(2)]


def test_zero_sigma_is_degenerate():
    spec = VariationSpec(vth_sigma=0.0, vth_mean=0.007, sample_count=5, master_seed=3)
    chips = sample_population(spec, MANIFEST)
    assert all(
        shift == pytest.approx(0.007) for c in chips for shift in c.device_shifts.values()
    )


def test_sample_moments_match_paper_values():
    # (0, 50 mV) over 500 chips x 8 devices, within 3 standard errors
    spec = VariationSpec(sample_count=500, master_seed=11)
    chips = sample_population(spec, MANIFEST)
    shifts = [s for c in chips for s in c.device_shifts.values()]
    n = len(shifts)
    mean = statistics.fmean(shifts)
    std = statistics.pstdev(shifts)
    assert abs(mean - 0.0) < 3 * 0.050 / math.sqrt(n)
    assert abs(std - 0.050) < 3 * 0.050 / math.sqrt(2 * n)


def test_reversed_enumeration_is_bit_identical():
    spec = VariationSpec(sample_count=20, master_seed=21)
    fwd = sample_population(spec, MANIFEST)
    rev = sample_population(spec, list(reversed(MANIFEST)))
    for a, b in zip(fwd, rev):
        assert a.device_shifts == b.device_shifts


def test_adding_devices_does_not_perturb_existing():
    spec = VariationSpec(sample_count=10, master_seed=5)
    base = sample_population(spec, MANIFEST)
    grown = sample_population(spec, MANIFEST + ["extra/path/t0"])
    for a, b in zip(base, grown):
        for path in MANIFEST:
            assert a.device_shifts[path] == b.device_shifts[path]


def test_export_import_round_trip(tmp_path):
    spec = VariationSpec(sample_count=7, master_seed=9)
    chips = sample_population(spec, MANIFEST)
    path = tmp_path / "population.tsv"
    export_population(chips, path)
    loaded = import_population(path)
    assert len(loaded) == len(chips)
    for a, b in zip(chips, loaded):
        assert a.chip_id == b.chip_id
        assert a.device_shifts == b.device_shifts


def test_empty_manifest_rejected():
    with pytest.raises(ValueError, match="empty"):
        sample_population(VariationSpec(sample_count=2, master_seed=1), [])


def test_duplicate_paths_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        sample_population(
            VariationSpec(sample_count=2, master_seed=1), ["a/t0", "a/t0"]
        )


def test_validation():
    with pytest.raises(ValueError):
        VariationSpec(vth_sigma=-0.01)
    with pytest.raises(ValueError):
        VariationSpec(sample_count=0)


def test_cross_path_correlation_bounded():
    spec = VariationSpec(sample_count=500, master_seed=77)
    chips = sample_population(spec, MANIFEST)
    bound = 4.0 / math.sqrt(500)
    pairs = [(MANIFEST[0], MANIFEST[1]), (MANIFEST[2], MANIFEST[5]), (MANIFEST[3], MANIFEST[7])]
    for pa, pb in pairs:
        xs = [c.device_shifts[pa] for c in chips]
        ys = [c.device_shifts[pb] for c in chips]
        assert abs(statistics.correlation(xs, ys)) < bound
