"""Rayleigh flat-fading channel draws, white Gaussian noise, and seeding.

Random streams are split by counter: the generator for ``(trial, role)``
is seeded from ``SeedSequence(master_seed, spawn_key=(trial, role_id))``.
A trial's draws therefore do not depend on which worker runs it or on
the order trials are executed.
"""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ._validation import check_block

__all__ = [
    "Role",
    "trial_stream",
    "ChannelRealization",
    "NoiseSpec",
    "draw_channel",
    "add_noise",
    "snr_to_n0",
]


class Role(IntEnum):
    CHANNEL = 0
    NOISE = 1
    BITS = 2


def trial_stream(master_seed, trial, role):
    """Independent generator for one trial and one role."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial), int(role)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    trial_index: int = 0


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level for one SNR point (unit total transmit power)."""

    snr_db: float

    @property
    def n0(self):
        return snr_to_n0(self.snr_db)


def snr_to_n0(snr_db):
    """Per-receive-antenna noise variance at unit total transmit power."""
    n0 = 10.0 ** (-np.asarray(snr_db, dtype=float) / 10.0)
    return float(n0) if n0.ndim == 0 else n0


def _cn(stream, shape):
    # CN(0, 1): real and imaginary parts each N(0, 1/2)
    z = stream.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def draw_channel(m, n, stream, trial_index=0):
    """``m x n`` matrix of i.i.d. CN(0, 1) fading coefficients."""
    if m < 1 or n < 1:
        raise ValueError(f"antenna counts must be >= 1, got {m}x{n}")
    return ChannelRealization(h=_cn(stream, (int(m), int(n))), trial_index=trial_index)


def add_noise(y, n0, stream):
    """Add i.i.d. CN(0, n0) noise to every entry of ``y``.

    ``n0`` may be a scalar, a :class:`NoiseSpec`, or an array broadcasting
    against ``y`` (e.g. one variance per leading SNR slice).
    """
    if isinstance(n0, NoiseSpec):
        n0 = n0.n0
    n0 = np.asarray(n0, dtype=float)
    if np.any(~(n0 > 0)):
        raise ValueError(f"noise variance must be positive, got {n0!r}")
    y = np.asarray(y)
    if y.ndim:
        check_block(y, y.shape[-1], "y")
    elif not np.isfinite(y):
        raise ValueError("y contains NaN or Inf")
    return y + np.sqrt(n0) * _cn(stream, y.shape)
