"""Gray-mapped QPSK and 16-QAM with unit average symbol energy.

Both constellations are square: the leading half of each bit label selects
the in-phase level and the trailing half the quadrature level. Bits are
read most significant first, so a label's integer value is its bit string
read in binary.

QPSK, per axis: ``0 -> +1``, ``1 -> -1``, scaled by ``1/sqrt(2)``.
16-QAM, per axis: ``00 -> -3``, ``01 -> -1``, ``11 -> +1``, ``10 -> +3``,
scaled by ``1/sqrt(10)``.
"""
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_bits
from .exceptions import DimensionError

__all__ = [
    "Constellation",
    "QPSK",
    "QAM16",
    "CONSTELLATIONS",
    "get_constellation",
    "modulate",
    "demodulate",
    "slice_symbol",
    "average_energy",
]


@dataclass(frozen=True)
class Constellation:
    """Square constellation built from a per-axis Gray PAM table.

    Parameters
    ----------
    name : str
    axis_levels : tuple of float
        Unnormalised amplitude for each per-axis label, indexed by label value.
    scale : float
        Normalisation applied to every point.
    """

    name: str
    axis_levels: tuple
    scale: float
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        levels = np.asarray(self.axis_levels, dtype=float) * self.scale
        n = levels.size
        # label = (i_label << half) | q_label
        pts = levels[:, None] + 1j * levels[None, :]
        pts = pts.reshape(n * n)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def bits_per_axis(self):
        return int(np.log2(len(self.axis_levels)))

    @property
    def bits_per_symbol(self):
        return 2 * self.bits_per_axis

    @property
    def order(self):
        return self.points.size

    def label_bits(self, labels):
        """Bit rows (MSB first) for integer labels."""
        labels = np.asarray(labels)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((labels[..., None] >> shifts) & 1).astype(np.uint8)

    def nearest_labels(self, y):
        """Label of the nearest point for each entry of ``y``.

        Square constellations decouple into two PAM decisions. Each axis
        takes the first minimiser over levels in label order, so ties go to
        the lowest label on each axis and hence to the lowest overall label.
        """
        y = np.asarray(y, dtype=np.complex128)
        if not np.all(np.isfinite(y)):
            raise ValueError("cannot slice non-finite values")
        levels = np.asarray(self.axis_levels, dtype=float) * self.scale
        i_lab = np.argmin(np.abs(y.real[..., None] - levels), axis=-1)
        q_lab = np.argmin(np.abs(y.imag[..., None] - levels), axis=-1)
        return (i_lab << self.bits_per_axis) | q_lab


QPSK = Constellation("qpsk", (1.0, -1.0), 1.0 / np.sqrt(2.0))
QAM16 = Constellation("qam16", (-3.0, -1.0, 3.0, 1.0), 1.0 / np.sqrt(10.0))

CONSTELLATIONS = {c.name: c for c in (QPSK, QAM16)}


def get_constellation(name):
    if isinstance(name, Constellation):
        return name
    try:
        return CONSTELLATIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown constellation {name!r}; expected one of {sorted(CONSTELLATIONS)}"
        ) from None


def modulate(bits, constellation):
    """Map a flat bit sequence onto symbols, ``bits_per_symbol`` bits at a time."""
    c = get_constellation(constellation)
    bits = check_bits(bits).ravel()
    bps = c.bits_per_symbol
    if bits.size % bps:
        raise DimensionError(
            f"{bits.size} bits is not a multiple of {bps} bits per symbol for {c.name}"
        )
    groups = bits.reshape(-1, bps).astype(np.int64)
    labels = groups @ (1 << np.arange(bps - 1, -1, -1))
    return c.points[labels]


def demodulate(y, constellation):
    """Hard decisions for an array of statistics; returns bits with a trailing axis."""
    c = get_constellation(constellation)
    return c.label_bits(c.nearest_labels(y))


def slice_symbol(y, constellation):
    """Nearest constellation point to a scalar ``y`` and its bit label."""
    c = get_constellation(constellation)
    label = int(c.nearest_labels(np.asarray([y]))[0])
    return complex(c.points[label]), tuple(int(b) for b in c.label_bits(label))


def average_energy(constellation):
    c = get_constellation(constellation)
    return float(np.mean(np.abs(c.points) ** 2))
