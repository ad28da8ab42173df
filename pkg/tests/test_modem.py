import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iets.exceptions import DimensionError
from iets.modem import (
    QAM16,
    QPSK,
    Constellation,
    average_energy,
    demodulate,
    get_constellation,
    modulate,
    slice_symbol,
)

CONSTELLATIONS = [QPSK, QAM16]

# independent restatement of the documented mappings
PAM_TABLE = {
    "qpsk": ({(0,): 1, (1,): -1}, math.sqrt(2)),
    "qam16": ({(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}, math.sqrt(10)),
}


def reference_points(name):
    table, norm = PAM_TABLE[name]
    half = len(next(iter(table)))
    out = {}
    for bits in itertools.product((0, 1), repeat=2 * half):
        out[bits] = complex(table[bits[:half]], table[bits[half:]]) / norm
    return out


def test_qpsk_zero_bits():
    np.testing.assert_allclose(modulate([0, 0], QPSK), [(1 + 1j) / np.sqrt(2)], rtol=1e-15)


def test_qam16_zero_bits():
    np.testing.assert_allclose(modulate([0, 0, 0, 0], QAM16), [(-3 - 3j) / np.sqrt(10)], rtol=1e-15)


def test_qpsk_pair():
    np.testing.assert_allclose(
        modulate([0, 0, 1, 1], "qpsk"), [(1 + 1j) / np.sqrt(2), (-1 - 1j) / np.sqrt(2)], rtol=1e-15
    )


@pytest.mark.parametrize("c", CONSTELLATIONS, ids=lambda c: c.name)
def test_matches_reference_table(c):
    for bits, point in reference_points(c.name).items():
        assert modulate(list(bits), c)[0] == pytest.approx(point, abs=1e-15)


def test_length_not_multiple():
    with pytest.raises(DimensionError, match="3 bits.*4 bits"):
        modulate([0, 1, 1], QAM16)


def test_unknown_name():
    with pytest.raises(ValueError, match="qam32"):
        get_constellation("qam32")


@pytest.mark.parametrize("c", CONSTELLATIONS, ids=lambda c: c.name)
class TestConstellationProperties:
    def test_unit_energy(self, c):
        assert abs(average_energy(c) - 1.0) <= 1e-15

    def test_zero_mean(self, c):
        assert math.fsum(c.points.real) == 0.0
        assert math.fsum(c.points.imag) == 0.0

    def test_labels_are_bijective(self, c):
        assert len(set(c.points.tolist())) == c.order == 2**c.bits_per_symbol

    def test_round_trip_exhaustive(self, c):
        for label in range(c.order):
            bits = c.label_bits(label)
            point, decided = slice_symbol(modulate(bits, c)[0], c)
            assert decided == tuple(bits)
            assert point == c.points[label]

    def test_gray_adjacency(self, c):
        d = np.abs(c.points[:, None] - c.points[None, :])
        dmin = d[d > 0].min()
        pairs = np.argwhere(np.isclose(d, dmin, rtol=1e-12))
        assert len(pairs) > 0
        for a, b in pairs:
            assert bin(int(a) ^ int(b)).count("1") == 1

    def test_exact_point_slices_to_itself(self, c):
        for p in c.points:
            assert slice_symbol(p, c)[0] == p


def test_scaled_energy():
    big = Constellation("qpsk2", (1.0, -1.0), 2.0 / np.sqrt(2.0))
    assert average_energy(big) == pytest.approx(4.0, rel=1e-15)


def test_slice_near_quadrant():
    point, bits = slice_symbol(0.9 + 0.1j, QPSK)
    assert point == pytest.approx((1 + 1j) / np.sqrt(2))
    assert bits == (0, 0)


def test_slice_nonfinite():
    with pytest.raises(ValueError):
        slice_symbol(complex(np.nan, 0), QPSK)


def test_tie_goes_to_lowest_label():
    # origin is equidistant from all four inner 16-QAM points
    _, bits = slice_symbol(0j, QAM16)
    inner = [lab for lab in range(16) if abs(QAM16.points[lab]) < 0.5]
    assert bits == tuple(QAM16.label_bits(min(inner)))
    _, bits = slice_symbol(0j, QPSK)
    assert bits == (0, 0)


def test_qam16_slicer_against_brute_force():
    rng = np.random.default_rng(11)
    y = rng.uniform(-2, 2, 10**6) + 1j * rng.uniform(-2, 2, 10**6)
    ref = reference_points("qam16")
    pts = np.array(list(ref.values()))
    labels = np.array([int("".join(map(str, b)), 2) for b in ref])
    best = labels[np.argmin(np.abs(y[:, None] - pts[None, :]), axis=1)]
    np.testing.assert_array_equal(QAM16.nearest_labels(y), best)


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.sampled_from(CONSTELLATIONS))
def test_slice_is_idempotent(y, c):
    point, bits = slice_symbol(y, c)
    assert slice_symbol(point, c) == (point, bits)


def test_demodulate_block_shape():
    bits = np.random.default_rng(2).integers(0, 2, (3, 5, 4))
    syms = modulate(bits.ravel(), QAM16).reshape(3, 5)
    np.testing.assert_array_equal(demodulate(syms, QAM16), bits)
