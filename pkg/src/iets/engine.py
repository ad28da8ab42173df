"""Deterministic Monte Carlo BER campaigns.

One campaign fixes the antenna counts, scheme and constellation and sweeps
SNR. Every channel trial draws one fading matrix and decomposes it once.
That realisation then carries ``symbol_vectors_per_trial`` fresh frames at
every SNR point. Each trial reads its own channel, bits and noise
substreams, so trials can be grouped into chunks and farmed out to worker
processes in any order. Chunk results are integer error counts that are
simply summed, which keeps the output independent of the worker count.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import NormalDist

import numpy as np

from .channel import Role, add_noise, draw_channel, snr_to_n0, trial_stream
from .exceptions import RankDeficiencyError
from .modem import get_constellation
from .transceiver import SchemeKind, make_transceiver

__all__ = [
    "ScenarioConfig",
    "BerPoint",
    "BerCurve",
    "binomial_ci",
    "run_scenario",
]

MAX_REDRAWS = 10
CHUNK_TRIALS = 250
_Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulation campaign."""

    tx_antennas: int
    rx_antennas: int
    scheme: str
    constellation: str
    snr_db_points: tuple = tuple(range(0, 25, 2))
    channel_trials: int = 5000
    symbol_vectors_per_trial: int = 100
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "snr_db_points", tuple(float(s) for s in self.snr_db_points))
        object.__setattr__(self, "scheme", SchemeKind(self.scheme).value)
        get_constellation(self.constellation)
        for name in ("tx_antennas", "rx_antennas", "channel_trials", "symbol_vectors_per_trial"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        pts = self.snr_db_points
        if not pts:
            raise ValueError("snr_db_points must not be empty")
        if any(not math.isfinite(p) for p in pts) or any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError(f"snr_db_points must be finite and strictly increasing, got {pts}")
        if self.scheme == SchemeKind.ZF_VBLAST.value and self.tx_antennas > self.rx_antennas:
            raise ValueError(
                f"zf-vblast needs tx_antennas <= rx_antennas, got "
                f"{self.tx_antennas} > {self.rx_antennas}"
            )

    @property
    def n_layers(self):
        return min(self.tx_antennas, self.rx_antennas)

    @property
    def bits_per_symbol(self):
        return get_constellation(self.constellation).bits_per_symbol

    def to_dict(self):
        d = asdict(self)
        d["snr_db_points"] = list(self.snr_db_points)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def binomial_ci(errors, total):
    """95% Wilson score interval for ``errors`` successes out of ``total``."""
    if total < 1 or not 0 <= errors <= total:
        raise ValueError(f"need 0 <= errors <= total and total >= 1, got {errors}/{total}")
    p = errors / total
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / total
    center = (p + z2 / (2 * total)) / denom
    half = _Z95 / denom * math.sqrt(p * (1 - p) / total + z2 / (4 * total * total))
    low = 0.0 if errors == 0 else min(max(center - half, 0.0), p)
    high = 1.0 if errors == total else max(min(center + half, 1.0), p)
    return low, high


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    bits_total: int
    bit_errors: int
    layer_errors: tuple
    ber: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, snr_db, bits_total, layer_errors):
        layer_errors = tuple(int(e) for e in layer_errors)
        errors = sum(layer_errors)
        low, high = binomial_ci(errors, bits_total)
        return cls(float(snr_db), int(bits_total), errors, layer_errors,
                   errors / bits_total, low, high)

    @property
    def std_error(self):
        """Binomial standard error of ``ber``."""
        return math.sqrt(self.ber * (1.0 - self.ber) / self.bits_total)


@dataclass(frozen=True)
class BerCurve:
    """BER against SNR, plus run metadata."""

    points: tuple
    redraws: int = 0
    runtime_s: float = field(default=0.0, compare=False)

    @property
    def snr_db(self):
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self):
        return np.array([p.ber for p in self.points])

    def at(self, snr_db):
        for p in self.points:
            if p.snr_db == snr_db:
                return p
        raise KeyError(snr_db)

    def to_dict(self):
        return {
            "points": [dict(asdict(p), layer_errors=list(p.layer_errors)) for p in self.points],
            "redraws": self.redraws,
        }

    @classmethod
    def from_dict(cls, d):
        pts = tuple(BerPoint(**dict(p, layer_errors=tuple(p["layer_errors"]))) for p in d["points"])
        return cls(points=pts, redraws=d.get("redraws", 0))


def _fit_trial(cfg, est, trial):
    stream = trial_stream(cfg.master_seed, trial, Role.CHANNEL)
    for attempt in range(MAX_REDRAWS + 1):
        h = draw_channel(cfg.rx_antennas, cfg.tx_antennas, stream, trial).h
        try:
            est.fit(h)
            return h, attempt
        except RankDeficiencyError:
            if attempt == MAX_REDRAWS:
                raise
    raise AssertionError("unreachable")


def _run_chunk(cfg, start, stop):
    """Per-SNR, per-layer bit-error counts for trials ``start..stop-1``."""
    c = get_constellation(cfg.constellation)
    est = make_transceiver(cfg.scheme, c)
    k, bps = cfg.n_layers, c.bits_per_symbol
    n_snr, frames = len(cfg.snr_db_points), cfg.symbol_vectors_per_trial
    n0 = snr_to_n0(np.array(cfg.snr_db_points))[:, None, None]
    weights = 1 << np.arange(bps - 1, -1, -1)
    errors = np.zeros((n_snr, k), dtype=np.int64)
    redraws = 0
    for trial in range(start, stop):
        h, extra = _fit_trial(cfg, est, trial)
        redraws += extra
        bits = trial_stream(cfg.master_seed, trial, Role.BITS).integers(
            0, 2, size=(n_snr, frames, k, bps), dtype=np.uint8
        )
        x = c.points[bits @ weights]
        y = est.transform(x) @ h.T
        y = add_noise(y, n0, trial_stream(cfg.master_seed, trial, Role.NOISE))
        bits_hat = est.predict(y).reshape(bits.shape)
        errors += np.count_nonzero(bits_hat != bits, axis=(1, 3))
    return errors, redraws


def run_scenario(cfg, workers=1):
    """Run a campaign and return its :class:`BerCurve`.

    Parameters
    ----------
    cfg : ScenarioConfig
    workers : int
        Worker processes. Results are bit-identical for any value.
    """
    t0 = time.perf_counter()
    bounds = [(s, min(s + CHUNK_TRIALS, cfg.channel_trials))
              for s in range(0, cfg.channel_trials, CHUNK_TRIALS)]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(bounds), *zip(*bounds)))
    else:
        parts = [_run_chunk(cfg, s, e) for s, e in bounds]
    errors = sum(p[0] for p in parts)
    redraws = sum(p[1] for p in parts)
    bits_total = (cfg.channel_trials * cfg.symbol_vectors_per_trial
                  * cfg.n_layers * cfg.bits_per_symbol)
    points = tuple(
        BerPoint.from_counts(snr, bits_total, errors[i])
        for i, snr in enumerate(cfg.snr_db_points)
    )
    return BerCurve(points=points, redraws=redraws, runtime_s=time.perf_counter() - t0)
