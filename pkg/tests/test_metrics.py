import math

import pytest

from stpuf import rngstream
from stpuf.arbiter import CrpDataset
from stpuf.metrics import HdReport, hamming_distance, inter_hd, intra_hd


def dataset(responses):
    n = len(next(iter(responses.values())))
    return CrpDataset(stage_count=4, challenges=[(0,) * 4] * n, responses=responses)


class TestHammingDistance:
    def test_axioms_on_random_vectors(self):
        for trial in range(30):
            a = [rngstream.coin(1, "a", trial, i) for i in range(32)]
            b = [rngstream.coin(1, "b", trial, i) for i in range(32)]
            assert hamming_distance(a, a) == 0
            assert hamming_distance(a, b) == hamming_distance(b, a)
            assert 0 <= hamming_distance(a, b) <= 32

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            hamming_distance([0, 1], [0, 1, 1])


class TestIntraHd:
    def test_identical_repeats_mean_zero(self):
        ds = dataset({(0, 0): [1, 0, 1, 1], (0, 1): [1, 0, 1, 1]})
        assert intra_hd(ds).mean == 0.0

    def test_complementary_repeats_mean_one(self):
        ds = dataset({(0, 0): [1, 0, 1, 1], (0, 1): [0, 1, 0, 0]})
        assert intra_hd(ds).mean == 1.0

    def test_small_dataset_matches_hand_enumeration(self):
        responses = {
            (0, 0): [0, 0, 0, 0, 0, 0, 0, 0],
            (0, 1): [0, 0, 0, 0, 1, 1, 0, 0],  # HD to r0 = 2
            (0, 2): [1, 0, 0, 0, 0, 0, 0, 1],  # HD to r0 = 2, to r1 = 4
            (1, 0): [1, 1, 1, 1, 1, 1, 1, 1],
            (1, 1): [1, 1, 1, 1, 1, 1, 1, 0],  # 1
            (1, 2): [0, 1, 1, 1, 1, 1, 1, 1],  # 1, 2
            (2, 0): [0, 1, 0, 1, 0, 1, 0, 1],
            (2, 1): [0, 1, 0, 1, 0, 1, 0, 1],  # 0
            (2, 2): [1, 0, 1, 0, 1, 0, 1, 0],  # 8, 8
        }
        # hand enumeration: pairwise HDs (2,2,4), (1,1,2), (0,8,8) over 8 bits
        expected = (2 + 2 + 4 + 1 + 1 + 2 + 0 + 8 + 8) / 9 / 8
        report = intra_hd(dataset(responses))
        assert report.mean == pytest.approx(expected, rel=1e-12)
        assert report.sample_count == 9

    def test_invariant_under_global_complement(self):
        responses = {
            (c, r): [rngstream.coin(2, c, r, i) for i in range(16)]
            for c in range(3)
            for r in range(3)
        }
        flipped = {k: [1 - b for b in v] for k, v in responses.items()}
        assert intra_hd(dataset(responses)).mean == intra_hd(dataset(flipped)).mean

    def test_single_repeat_rejected(self):
        ds = dataset({(0, 0): [1, 0, 1, 0]})
        with pytest.raises(ValueError, match="repeats"):
            intra_hd(ds)


class TestInterHd:
    def test_two_identical_chips_zero(self):
        ds = dataset({(0, 0): [1, 1, 0, 0], (1, 0): [1, 1, 0, 0]})
        assert inter_hd(ds).mean == 0.0

    def test_ideal_random_near_half(self):
        # binomial expectation oracle: mean 0.5, 3-sigma band over pooled pairs
        n_chips, length = 24, 64
        responses = {
            (c, 0): [rngstream.coin(3, c, i) for i in range(length)]
            for c in range(n_chips)
        }
        report = inter_hd(dataset(responses))
        pairs = n_chips * (n_chips - 1) / 2
        se = math.sqrt(0.25 / length) / math.sqrt(pairs) * math.sqrt(2)
        assert abs(report.mean - 0.5) < max(5 * se, 0.02)

    def test_single_chip_rejected(self):
        ds = dataset({(0, 0): [1, 0, 1, 0], (0, 1): [1, 0, 1, 0]})
        with pytest.raises(ValueError, match="chips"):
            inter_hd(ds)


def test_report_mean_bounds_enforced():
    with pytest.raises(ValueError, match="mean"):
        HdReport(mean=1.5, sigma=0.0, sample_count=1, kind="intra")
