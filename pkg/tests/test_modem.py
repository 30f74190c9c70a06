"""Constellations, Gray labeling, precoding, hard decisions."""

import numpy as np
import pytest

from scfde.modem import (
    constellation,
    count_bit_errors,
    demod_hard,
    map_bits,
    precode,
)

RNG = np.random.default_rng(99)


def test_bpsk_sign_convention():
    c = constellation("bpsk")
    np.testing.assert_allclose(map_bits([0], c), [1.0 + 0j])
    np.testing.assert_allclose(map_bits([1], c), [-1.0 + 0j])


def test_16qam_all_zero_bits_hit_corner():
    c = constellation("16qam")
    (s,) = map_bits([0, 0, 0, 0], c)
    corner = 3 / np.sqrt(10)
    assert abs(abs(s.real) - corner) < 1e-12
    assert abs(abs(s.imag) - corner) < 1e-12


@pytest.mark.parametrize("name,bps", [("bpsk", 1), ("8psk", 3), ("16qam", 4)])
def test_unit_energy_and_label_bijection(name, bps):
    c = constellation(name)
    assert c.bits_per_symbol == bps
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, rel=1e-12)
    labels = {tuple(row) for row in c.bit_labels}
    assert len(labels) == 2**bps


def test_is_real_flag():
    assert constellation("bpsk").is_real
    assert not constellation("8psk").is_real
    assert not constellation("16qam").is_real


@pytest.mark.parametrize("name", ["bpsk", "8psk", "16qam"])
def test_map_demod_round_trip(name):
    c = constellation(name)
    bits = RNG.integers(0, 2, 3 * 4 * c.bits_per_symbol)
    symbols = map_bits(bits, c)
    dec_symbols, dec_bits = demod_hard(symbols, c)
    np.testing.assert_allclose(dec_symbols, symbols, atol=1e-12)
    np.testing.assert_array_equal(dec_bits, bits)


def test_symbol_variance_statistical():
    c = constellation("16qam")
    bits = RNG.integers(0, 2, 4 * 10**6)
    s = map_bits(bits, c)
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=3e-3)
    assert abs(s.mean()) < 3e-3


def test_gray_adjacency_8psk():
    # ring neighbors differ in exactly one bit
    c = constellation("8psk")
    order = np.argsort(np.angle(c.points) % (2 * np.pi))
    for a, b in zip(order, np.roll(order, -1)):
        diff = np.sum(c.bit_labels[a] != c.bit_labels[b])
        assert diff == 1


def test_gray_adjacency_16qam():
    # grid neighbors (distance 2/sqrt(10) along one axis) differ in one bit
    c = constellation("16qam")
    step = 2 / np.sqrt(10)
    for i, p in enumerate(c.points):
        for j, q in enumerate(c.points):
            if i < j and abs(abs(p - q) - step) < 1e-9:
                assert np.sum(c.bit_labels[i] != c.bit_labels[j]) == 1


def test_gray_adjacency_bpsk():
    c = constellation("bpsk")
    assert np.sum(c.bit_labels[0] != c.bit_labels[1]) == 1


def test_bpsk_ignores_imaginary_part():
    c = constellation("bpsk")
    syms, bits = demod_hard(np.array([-0.1 + 5j, 0.3 - 2j]), c)
    np.testing.assert_allclose(syms, [-1, 1])
    np.testing.assert_array_equal(bits, [1, 0])


def test_tie_break_takes_lower_index():
    c = constellation("16qam")
    # midpoint of the first two points in table order
    z = (c.points[0] + c.points[1]) / 2
    syms, _ = demod_hard(np.array([z]), c)
    assert syms[0] == c.points[0]


def test_map_bits_rejects_indivisible():
    with pytest.raises(ValueError):
        map_bits([0, 1, 0], constellation("16qam"))


def test_count_bit_errors():
    assert count_bit_errors([0, 1, 1, 0], [0, 0, 1, 1]) == 2
    assert count_bit_errors([1] * 8, [0] * 8) == 8
    assert count_bit_errors([], []) == 0
    with pytest.raises(ValueError):
        count_bit_errors([0, 1], [0])


def test_precode_matches_transform():
    x_t = RNG.standard_normal(16) + 1j * RNG.standard_normal(16)
    block = precode(x_t)
    np.testing.assert_allclose(block.precoded, np.fft.fft(x_t), rtol=1e-12)
    np.testing.assert_allclose(block.time_symbols, x_t)
    # impulse block has flat spectrum
    np.testing.assert_allclose(precode([1, 0, 0, 0]).precoded, np.ones(4), atol=1e-14)


def test_precode_parseval():
    x_t = RNG.standard_normal(64) + 1j * RNG.standard_normal(64)
    x = precode(x_t).precoded
    assert np.sum(np.abs(x) ** 2) / 64 == pytest.approx(np.sum(np.abs(x_t) ** 2))
