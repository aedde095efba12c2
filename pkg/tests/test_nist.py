import math

import mpmath
import numpy as np
import pytest
from scipy.special import gammaincc

from stpuf import nist, rngstream
from stpuf.nist import NistResult, nist_suite


def random_bits(n, label="bits", seed=4242):
    return rngstream.philox(seed, label).integers(0, 2, n, dtype=np.uint8)


class TestKnownPathologies:
    def test_all_zeros_fails_frequency(self):
        results = {r.test_name: r for r in nist_suite([0] * 1000)}
        freq = results["frequency"]
        assert freq.p_value == pytest.approx(0.0, abs=1e-12)
        assert not freq.passed

    def test_alternating_passes_frequency_fails_runs(self):
        bits = [i % 2 for i in range(1000)]
        results = {r.test_name: r for r in nist_suite(bits, tests=["frequency", "runs"])}
        assert results["frequency"].p_value == pytest.approx(1.0)
        assert results["frequency"].passed
        assert not results["runs"].passed
        assert results["runs"].p_value == pytest.approx(0.0, abs=1e-9)


class TestFrequencyOracle:
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_matches_direct_formula_to_six_decimals(self, seed):
        # independent oracle: erfc(|S| / sqrt(2 n)) computed with mpmath
        bits = random_bits(100, "freq-oracle", seed)
        s = abs(int(np.sum(2 * bits.astype(int) - 1)))
        oracle = float(mpmath.erfc(s / mpmath.sqrt(2 * len(bits))))
        assert nist.frequency(bits) == pytest.approx(oracle, abs=1e-6)


class TestSpecialFunctionAccuracy:
    @pytest.mark.parametrize("a,x", [(0.5, 0.25), (1.0, 1.0), (4.0, 2.0),
                                     (64.0, 60.0), (128.0, 140.0)])
    def test_igamc_against_mpmath(self, a, x):
        oracle = float(mpmath.gammainc(a, x, mpmath.inf, regularized=True))
        assert abs(float(gammaincc(a, x)) - oracle) < 1e-9

    @pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 2.5, 5.0])
    def test_erfc_against_mpmath(self, x):
        assert abs(math.erfc(x) - float(mpmath.erfc(x))) < 1e-9


class TestInsufficientData:
    def test_short_input_yields_results_not_crash(self):
        results = nist_suite([1, 0, 1])
        assert len(results) == 9
        for r in results:
            assert isinstance(r, NistResult)
            assert r.p_value is None
            assert not r.passed
            assert "needs" in r.note

    def test_medium_input_runs_some_tests(self):
        results = {r.test_name: r for r in nist_suite(random_bits(2048, "med"))}
        assert results["frequency"].p_value is not None
        assert results["non_overlapping_template"].p_value is not None
        assert results["spectral"].p_value is not None


class TestNullBehavior:
    def test_million_bit_stream_passes_everything(self):
        results = nist_suite(random_bits(1_000_000, "null-smoke"))
        assert all(r.passed for r in results)

    def test_p_values_in_unit_interval(self):
        for seed in range(5):
            for r in nist_suite(random_bits(20_000, "unit", seed)):
                assert r.p_value is not None
                assert 0.0 <= r.p_value <= 1.0

    @pytest.mark.parametrize(
        "func",
        [nist.cumulative_sums, nist.serial, nist.approximate_entropy, nist.spectral],
    )
    def test_null_p_values_not_degenerate(self, func):
        ps = [float(func(random_bits(20_000, "nd", s))) for s in range(40)]
        assert 0.25 < sum(ps) / len(ps) < 0.75


class TestLongestRun:
    def test_tier_selection_by_length(self):
        assert nist.longest_run(random_bits(200, "lr")) is not None
        assert nist.longest_run(random_bits(10_000, "lr")) is not None

    def test_degenerate_block_distribution_fails(self):
        assert nist.longest_run(np.ones(1024, dtype=np.uint8)) < 0.01


class TestSuiteInterface:
    def test_unknown_test_rejected(self):
        with pytest.raises(ValueError, match="unknown NIST test"):
            nist_suite([0, 1] * 100, tests=["monobit2000"])

    def test_invalid_bits_rejected(self):
        with pytest.raises(ValueError, match="0s and 1s"):
            nist_suite([0, 1, 2])

    def test_nine_tests_by_default(self):
        assert len(nist.TEST_NAMES) == 9
