"""Tests for the convolutional encoder and soft Viterbi decoder."""

import numpy as np

from pnofdm.coding import conv_encode, viterbi_decode_soft


def to_llrs(coded, magnitude=10.0):
    return magnitude * (1.0 - 2.0 * np.asarray(coded, dtype=float))


class TestEncoder:
    def test_empty_input_flush_only(self):
        out = conv_encode([])
        assert out.size == 12
        assert not out.any()

    def test_all_zero_codeword(self):
        assert not conv_encode(np.zeros(10, dtype=int)).any()

    def test_impulse_response_matches_generators(self):
        out = conv_encode([1, 0, 0, 0, 0, 0, 0])
        # interleaved streams reproduce the octal 133/171 tap patterns
        assert np.array_equal(out[0:14:2], [1, 0, 1, 1, 0, 1, 1])
        assert np.array_equal(out[1:14:2], [1, 1, 1, 1, 0, 0, 1])

    def test_rate_and_termination(self):
        bits = np.random.default_rng(0).integers(0, 2, 37)
        assert conv_encode(bits).size == 2 * (37 + 6)


class TestViterbi:
    def test_noiseless_inversion(self):
        rng = np.random.default_rng(1)
        for trial in range(5):
            bits = rng.integers(0, 2, 80 + trial)
            decoded = viterbi_decode_soft(to_llrs(conv_encode(bits)))
            assert np.array_equal(decoded, bits)

    def test_single_flip_corrected(self):
        # Free distance 10 of this code absorbs one hard flip easily.
        rng = np.random.default_rng(2)
        bits = rng.integers(0, 2, 100)
        llrs = to_llrs(conv_encode(bits))
        for pos in (0, 37, 150):
            corrupted = llrs.copy()
            corrupted[pos] = -corrupted[pos]
            assert np.array_equal(viterbi_decode_soft(corrupted), bits)

    def test_all_zero_llrs_tie_break(self):
        decoded = viterbi_decode_soft(np.zeros(80))
        assert not decoded.any()

    def test_soft_beats_hard_scaling(self):
        # LLR magnitudes matter: a strongly trusted wrong bit flanked by
        # weakly trusted corrections still decodes.
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, 60)
        llrs = to_llrs(conv_encode(bits), magnitude=1.0)
        noisy = llrs + 0.45 * rng.standard_normal(llrs.size)
        assert np.array_equal(viterbi_decode_soft(noisy), bits)
