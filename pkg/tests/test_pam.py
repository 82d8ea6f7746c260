"""Bit/symbol mapping, slicer, BER and FEC verdict contracts."""

import numpy as np
import pytest

from kafeq.pam import (
    HD_FEC_LIMIT,
    KP4_FEC_LIMIT,
    SD_FEC_LIMIT,
    bit_error_rate,
    bits_to_pam4,
    fec_verdict,
    generate_bits,
    pam4_to_bits,
    slice_level,
    slice_pam4,
)


class TestGenerateBits:
    def test_deterministic(self):
        assert np.array_equal(generate_bits(1, 8), generate_bits(1, 8))

    def test_seeds_differ(self):
        assert not np.array_equal(generate_bits(1, 8), generate_bits(2, 8))

    def test_marginal_frequency(self):
        b = generate_bits(7, 10**6)
        assert 0.49 <= b.mean() <= 0.51

    @pytest.mark.parametrize("n", [0, 1, 3, -2])
    def test_rejects_bad_lengths(self, n):
        with pytest.raises(ValueError):
            generate_bits(1, n)


class TestMapping:
    def test_gray_map(self):
        assert bits_to_pam4([0, 0, 0, 1, 1, 1, 1, 0]).tolist() == [-3.0, -1.0, 1.0, 3.0]

    def test_empty(self):
        assert bits_to_pam4([]).size == 0
        assert pam4_to_bits([]).size == 0

    def test_repeated_pair(self):
        assert bits_to_pam4([1, 1, 1, 1]).tolist() == [1.0, 1.0]

    def test_inverse(self):
        assert pam4_to_bits([-3, -1, 1, 3]).tolist() == [0, 0, 0, 1, 1, 1, 1, 0]
        assert pam4_to_bits([1.0]).tolist() == [1, 1]

    def test_round_trip_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            bits = rng.integers(0, 2, size=2 * rng.integers(0, 50))
            assert np.array_equal(pam4_to_bits(bits_to_pam4(bits)), bits)

    def test_gray_adjacency(self):
        # adjacent amplitude levels differ in exactly one bit
        pairs = {lvl: pam4_to_bits([lvl]) for lvl in (-3.0, -1.0, 1.0, 3.0)}
        for lo, hi in [(-3.0, -1.0), (-1.0, 1.0), (1.0, 3.0)]:
            assert int(np.sum(pairs[lo] != pairs[hi])) == 1

    def test_rejects_odd_length(self):
        with pytest.raises(ValueError):
            bits_to_pam4([0, 1, 1])

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            bits_to_pam4([0, 2])

    def test_rejects_off_grid_symbols(self):
        with pytest.raises(ValueError):
            pam4_to_bits([0.5])


class TestSlicer:
    def test_nearest_level(self):
        assert slice_pam4([0.9, -2.7, 2.1, -0.2]).tolist() == [1.0, -3.0, 3.0, -1.0]

    def test_threshold_ties_resolve_inward(self):
        assert slice_pam4([2.0]).tolist() == [1.0]
        assert slice_pam4([-2.0]).tolist() == [-1.0]

    def test_exact_level(self):
        assert slice_pam4([-3.0]).tolist() == [-3.0]

    def test_scalar_matches_vector(self):
        rng = np.random.default_rng(1)
        x = np.concatenate([rng.normal(scale=3, size=500), [-2.0, 0.0, 2.0, -0.0]])
        vec = slice_pam4(x)
        assert all(slice_level(v) == s for v, s in zip(x, vec))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            slice_pam4([np.nan])
        with pytest.raises(ValueError):
            slice_level(np.inf)

    def test_noiseless_chain(self):
        bits = generate_bits(11, 2000)
        decided = slice_pam4(bits_to_pam4(bits))
        assert bit_error_rate(bits, pam4_to_bits(decided)) == 0.0


class TestBitErrorRate:
    def test_zero_errors(self):
        b = generate_bits(3, 1000)
        assert bit_error_rate(b, b) == 0.0

    def test_single_error(self):
        a = np.zeros(1000, dtype=int)
        b = a.copy()
        b[123] = 1
        assert bit_error_rate(a, b) == 1e-3

    def test_all_flipped(self):
        assert bit_error_rate([0, 1, 0, 1], [1, 0, 1, 0]) == 1.0

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        a = rng.integers(0, 2, 500)
        b = rng.integers(0, 2, 500)
        assert bit_error_rate(a, b) == bit_error_rate(b, a)

    def test_rejects_mismatch_and_empty(self):
        with pytest.raises(ValueError):
            bit_error_rate([0, 1], [0])
        with pytest.raises(ValueError):
            bit_error_rate([], [])


class TestFecVerdict:
    def test_kp4_boundary_inclusive(self):
        v = fec_verdict(KP4_FEC_LIMIT)
        assert v.passes_kp4 and v.passes_hd and v.passes_sd

    def test_hd_boundary(self):
        v = fec_verdict(HD_FEC_LIMIT)
        assert not v.passes_kp4
        assert v.passes_hd and v.passes_sd

    def test_sd_boundary(self):
        v = fec_verdict(SD_FEC_LIMIT)
        assert (v.passes_kp4, v.passes_hd, v.passes_sd) == (False, False, True)

    def test_zero_ber(self):
        v = fec_verdict(0.0)
        assert v.passes_kp4 and v.passes_hd and v.passes_sd

    def test_monotonicity(self):
        rng = np.random.default_rng(3)
        bers = np.sort(10.0 ** rng.uniform(-6, 0, 100))
        for lo, hi in zip(bers[:-1], bers[1:]):
            vl, vh = fec_verdict(lo), fec_verdict(hi)
            for flag in ("passes_kp4", "passes_hd", "passes_sd"):
                if getattr(vh, flag):
                    assert getattr(vl, flag)

    def test_rejects_out_of_range(self):
        for bad in (-0.1, 1.1, float("nan")):
            with pytest.raises(ValueError):
                fec_verdict(bad)
