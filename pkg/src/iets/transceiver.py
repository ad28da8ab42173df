"""Transmit and detect chains for the three MIMO schemes.

All chains share one power convention: the transmitted vector is scaled by
``1/sqrt(K)`` so that ``E||s||^2 = 1`` for unit-energy symbols, and the
scale is divided back out of the decision statistics.

Blocks of symbol or received vectors are arrays whose last axis is the
vector axis; any leading axes (frames, SNR points) are carried through.

* ``gmd-sic``: precode with ``P``, filter with ``Q^H``, then cancel layers
  bottom-up through the triangular ``R``.
* ``svd-eigenmode``: precode with ``V``, filter with ``U^H``, slice each
  eigenmode on its own.
* ``zf-vblast``: no precoder; ordered zero-forcing nulling and cancellation
  on the raw channel.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_block, check_matrix
from .exceptions import DimensionError, RankDeficiencyError
from .gmd import gmd
from .linalg import pinv, svd
from .modem import get_constellation

__all__ = [
    "SchemeKind",
    "TxFrame",
    "DetectionResult",
    "gmd_transmit",
    "gmd_sic_detect",
    "svd_transmit",
    "svd_detect",
    "vblast_transmit",
    "zf_vblast_plan",
    "zf_vblast_detect",
    "GmdSicTransceiver",
    "SvdEigenmodeTransceiver",
    "ZfVblastTransceiver",
    "make_transceiver",
]

LAYER_TOL = 1e-12


class SchemeKind(str, Enum):
    GMD_SIC = "gmd-sic"
    SVD_EIGENMODE = "svd-eigenmode"
    ZF_VBLAST = "zf-vblast"


@dataclass(frozen=True)
class TxFrame:
    x: np.ndarray
    s: np.ndarray
    power_scale: float


@dataclass(frozen=True)
class DetectionResult:
    """Detector output.

    Attributes
    ----------
    x_hat : ndarray, shape (..., K)
        Normalised decision statistics, in stream order.
    bits_hat : ndarray, shape (..., K * bits_per_symbol)
        Hard bit decisions, stream after stream.
    per_layer_gain : ndarray, shape (K,)
        Amplitude gain of each layer's statistic relative to noise of
        variance ``n0`` (before normalisation).
    """

    x_hat: np.ndarray
    bits_hat: np.ndarray
    per_layer_gain: np.ndarray


def _precode(x, steering):
    k = steering.shape[1]
    block, single = check_block(x, k, "x")
    scale = 1.0 / np.sqrt(k)
    s = scale * (block @ steering.T)
    if single:
        block, s = block[0], s[0]
    return TxFrame(x=block, s=s, power_scale=scale)


def gmd_transmit(x, g):
    """``s = P x / sqrt(K)``."""
    return _precode(x, g.p)


def svd_transmit(x, dec):
    """``s = V x / sqrt(K)``."""
    return _precode(x, dec.v)


def vblast_transmit(x, n_tx):
    """One stream per transmit antenna, ``s = x / sqrt(K)``."""
    return _precode(x, np.eye(n_tx, dtype=np.complex128))


def _finish(stats, labels, c, gains, single):
    bits = c.label_bits(labels)
    bits = bits.reshape(bits.shape[:-2] + (-1,))
    if single:
        stats, bits = stats[0], bits[0]
    return DetectionResult(x_hat=stats, bits_hat=bits, per_layer_gain=gains)


def gmd_sic_detect(y, g, constellation, genie_x=None):
    """Back-substitution detection on ``Q^H y = R x / sqrt(K) + z``.

    Layers are decided from the last to the first. Each decision is scaled
    by ``r_ij / sqrt(K)`` and subtracted from the layers above it. Passing
    the true symbols as ``genie_x`` cancels those instead of the decisions,
    removing error propagation.
    """
    c = get_constellation(constellation)
    r = g.r
    k = r.shape[0]
    diag = np.diag(r)
    bad = np.flatnonzero(np.abs(diag) < LAYER_TOL)
    if bad.size:
        raise RankDeficiencyError(f"layer {bad[0]} has gain {diag[bad[0]]!r}", int(bad[0]))
    block, single = check_block(y, g.q.shape[0], "y")
    scale = 1.0 / np.sqrt(k)
    xt = block @ g.q.conj()
    if genie_x is not None:
        genie_x, _ = check_block(genie_x, k, "genie_x")
        genie_x = np.broadcast_to(genie_x, xt.shape)

    stats = np.empty_like(xt)
    labels = np.empty(xt.shape, dtype=np.int64)
    decided = np.empty_like(xt)
    for i in range(k - 1, -1, -1):
        z = xt[..., i]
        if i < k - 1:
            fed = genie_x[..., i + 1:] if genie_x is not None else decided[..., i + 1:]
            z = z - scale * (fed @ r[i, i + 1:])
        stats[..., i] = z / (scale * r[i, i])
        labels[..., i] = c.nearest_labels(stats[..., i])
        decided[..., i] = c.points[labels[..., i]]
    return _finish(stats, labels, c, scale * diag, single)


def svd_detect(y, dec, constellation):
    """Per-eigenmode slicing of ``U^H y`` with equal power on every mode."""
    c = get_constellation(constellation)
    block, single = check_block(y, dec.u.shape[0], "y")
    k = dec.sigma.size
    scale = 1.0 / np.sqrt(k)
    gains = scale * dec.sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        stats = (block @ dec.u.conj()) / gains
    # a zero-gain mode carries nothing; decide it from a zero statistic
    stats = np.where(gains > 0, stats, 0.0)
    labels = c.nearest_labels(stats)
    return _finish(stats, labels, c, gains, single)


def zf_vblast_plan(h):
    """Detection order and nulling vectors for ordered ZF V-BLAST.

    At each stage the pseudoinverse of the remaining columns is formed and
    the stream whose nulling row has the smallest norm (largest
    post-detection SNR) is taken next; ties go to the lowest stream index.

    Returns
    -------
    list of (int, ndarray, ndarray)
        ``(stream, nulling_row, channel_column)`` in detection order.
    """
    h = check_matrix(h, "h")
    m, n = h.shape
    if n > m:
        raise DimensionError(f"ZF V-BLAST needs tx <= rx, got {m}x{n} channel")
    remaining = list(range(n))
    plan = []
    while remaining:
        sub = h[:, remaining]
        sigma = svd(sub).sigma
        if sigma[-1] <= LAYER_TOL * sigma[0]:
            raise RankDeficiencyError(
                f"deflated channel with streams {remaining} is rank deficient",
                remaining[int(np.argmin(sigma))] if len(remaining) > 1 else remaining[0],
            )
        g = pinv(sub)
        norms = np.einsum("ij,ij->i", g.conj(), g).real
        pick = int(np.argmin(norms))
        stream = remaining.pop(pick)
        plan.append((stream, g[pick], h[:, stream]))
    return plan


def zf_vblast_detect(y, h, constellation, plan=None):
    """Ordered zero-forcing nulling and cancellation."""
    c = get_constellation(constellation)
    h = check_matrix(h, "h")
    if plan is None:
        plan = zf_vblast_plan(h)
    block, single = check_block(y, h.shape[0], "y")
    k = h.shape[1]
    scale = 1.0 / np.sqrt(k)
    resid = block.copy()
    stats = np.empty(block.shape[:-1] + (k,), dtype=np.complex128)
    labels = np.empty(stats.shape, dtype=np.int64)
    gains = np.empty(k)
    for stream, w, col in plan:
        st = (resid @ w) / scale
        lab = c.nearest_labels(st)
        stats[..., stream] = st
        labels[..., stream] = lab
        gains[stream] = scale / np.linalg.norm(w)
        resid = resid - scale * c.points[lab][..., None] * col
    return _finish(stats, labels, c, gains, single)


class _Transceiver(BaseEstimator):
    """Shared estimator surface.

    ``fit(H)`` prepares the scheme for one channel realisation,
    ``transform(X)`` maps symbol vectors to antenna signals, and
    ``predict(Y)`` returns hard bit decisions for received vectors.
    """

    scheme = None

    def __init__(self, constellation="qpsk"):
        self.constellation = constellation

    def _check_fitted(self):
        check_is_fitted(self, "n_layers_")

    def fit(self, X, y=None):
        h = check_matrix(X, "H")
        self.constellation_ = get_constellation(self.constellation)
        self.n_rx_, self.n_tx_ = h.shape
        self._fit_channel(h)
        return self

    def transform(self, X):
        self._check_fitted()
        return self.transmit(X).s

    def decision_function(self, X):
        return self.detect(X).x_hat

    def predict(self, X):
        return self.detect(X).bits_hat


class GmdSicTransceiver(_Transceiver):
    """GMD precoding with successive interference cancellation.

    Parameters
    ----------
    constellation : {"qpsk", "qam16"}
    """

    scheme = SchemeKind.GMD_SIC

    def _fit_channel(self, h):
        self.decomposition_ = gmd(h)
        self.n_layers_ = self.decomposition_.n_layers

    def transmit(self, X):
        self._check_fitted()
        return gmd_transmit(X, self.decomposition_)

    def detect(self, X, genie_x=None):
        self._check_fitted()
        return gmd_sic_detect(X, self.decomposition_, self.constellation_, genie_x=genie_x)


class SvdEigenmodeTransceiver(_Transceiver):
    """Equal-power eigenmode transmission over the SVD of the channel."""

    scheme = SchemeKind.SVD_EIGENMODE

    def _fit_channel(self, h):
        self.decomposition_ = svd(h)
        self.n_layers_ = self.decomposition_.sigma.size

    def transmit(self, X):
        self._check_fitted()
        return svd_transmit(X, self.decomposition_)

    def detect(self, X):
        self._check_fitted()
        return svd_detect(X, self.decomposition_, self.constellation_)


class ZfVblastTransceiver(_Transceiver):
    """Uncoded spatial multiplexing with ordered ZF V-BLAST detection."""

    scheme = SchemeKind.ZF_VBLAST

    def _fit_channel(self, h):
        self.plan_ = zf_vblast_plan(h)
        self.channel_ = h
        self.n_layers_ = h.shape[1]
        self.order_ = [stream for stream, _, _ in self.plan_]

    def transmit(self, X):
        self._check_fitted()
        return vblast_transmit(X, self.n_tx_)

    def detect(self, X):
        self._check_fitted()
        return zf_vblast_detect(X, self.channel_, self.constellation_, plan=self.plan_)


_SCHEMES = {
    SchemeKind.GMD_SIC: GmdSicTransceiver,
    SchemeKind.SVD_EIGENMODE: SvdEigenmodeTransceiver,
    SchemeKind.ZF_VBLAST: ZfVblastTransceiver,
}


def make_transceiver(scheme, constellation="qpsk"):
    """Unfitted transceiver for a scheme name such as ``"gmd-sic"``."""
    try:
        kind = SchemeKind(scheme)
    except ValueError:
        raise ValueError(
            f"unknown scheme {scheme!r}; expected one of {[s.value for s in SchemeKind]}"
        ) from None
    return _SCHEMES[kind](constellation=constellation)
