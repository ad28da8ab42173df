"""Geometric mean decomposition ``H = Q R P^H``.

``R`` is real upper triangular with every diagonal entry equal to the
geometric mean of the singular values of ``H``. The construction starts
from the SVD and walks down the diagonal, pairing one entry above the mean
with one below it and replacing the pair with a 2x2 upper-triangular block
through a left and a right plane rotation.
"""
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_block, check_matrix
from .exceptions import OrderingError, RankDeficiencyError
from .linalg import svd

__all__ = [
    "GmdResult",
    "geometric_mean",
    "two_by_two_step",
    "gmd",
    "GeometricMeanDecomposition",
]

RANK_TOL = 1e-12
# slack on the [min, max] interval check; products of K diagonals drift by rounding
_ORDER_SLACK = 1e-10


@dataclass(frozen=True)
class GmdResult:
    """Result of :func:`gmd`.

    Attributes
    ----------
    q : ndarray, shape (M, K)
        Receive steering matrix, orthonormal columns.
    r : ndarray, shape (K, K)
        Real upper-triangular coupling matrix; ``r[i, j] == 0`` for ``i > j``.
    p : ndarray, shape (N, K)
        Transmit steering matrix, orthonormal columns.
    sigma_bar : float
        Common diagonal value of ``r``.
    """

    q: np.ndarray
    r: np.ndarray
    p: np.ndarray
    sigma_bar: float

    @property
    def n_layers(self):
        return self.r.shape[0]

    def reconstruct(self):
        return self.q @ self.r @ self.p.conj().T


def geometric_mean(sigma):
    """Geometric mean, computed as ``exp(mean(log(sigma)))``."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0:
        raise ValueError("geometric mean of an empty sequence")
    bad = np.flatnonzero(~(sigma > 0))
    if bad.size:
        raise RankDeficiencyError(
            f"singular value {bad[0]} is {sigma[bad[0]]!r}; all must be positive",
            index=int(bad[0]),
        )
    return float(np.exp(np.mean(np.log(sigma))))


def two_by_two_step(delta1, delta2, sigma_bar):
    """Rotation pair that moves ``sigma_bar`` onto the first diagonal slot.

    With ``G2 = [[c, -s], [s, c]]`` and
    ``G1 = [[c*delta1, -s*delta2], [s*delta2, c*delta1]] / sigma_bar``,
    ``G1.T @ diag(delta1, delta2) @ G2`` equals the returned ``r2``.

    Parameters
    ----------
    delta1, delta2 : float
        Positive diagonal pair.
    sigma_bar : float
        Target value; must lie between ``delta1`` and ``delta2``.

    Returns
    -------
    c, s : float
        Cosine and sine of the right rotation, both in ``[0, 1]``.
    r2 : ndarray, shape (2, 2)
        ``[[sigma_bar, x], [0, delta1 * delta2 / sigma_bar]]``.
    """
    if not (delta1 > 0 and delta2 > 0 and sigma_bar > 0):
        raise ValueError("delta1, delta2 and sigma_bar must be positive")
    lo, hi = min(delta1, delta2), max(delta1, delta2)
    if sigma_bar < lo * (1 - _ORDER_SLACK) or sigma_bar > hi * (1 + _ORDER_SLACK):
        raise OrderingError(
            f"sigma_bar={sigma_bar!r} outside [{lo!r}, {hi!r}]"
        )
    d2 = delta1 * delta1 - delta2 * delta2
    if abs(d2) <= 1e-15 * hi * hi:
        c, s = 1.0, 0.0
    else:
        c2 = (sigma_bar * sigma_bar - delta2 * delta2) / d2
        c2 = min(max(c2, 0.0), 1.0)
        c = math.sqrt(c2)
        s = math.sqrt(1.0 - c2)
    x = -c * s * d2 / sigma_bar
    r2 = np.array([[sigma_bar, x], [0.0, delta1 * delta2 / sigma_bar]])
    return c, s, r2


def _pick_pair(diag, k, sigma_bar):
    """Indices (>= k) of one entry >= sigma_bar and another <= sigma_bar."""
    tail = diag[k:]
    above = np.flatnonzero(tail >= sigma_bar)
    p = int(above[0]) if above.size else int(np.argmax(tail))
    rest = np.flatnonzero(tail <= sigma_bar)
    rest = rest[rest != p]
    if rest.size:
        q = int(rest[0])
    else:
        # rounding left nothing <= sigma_bar besides p: take the smallest other
        others = np.delete(np.arange(tail.size), p)
        q = int(others[np.argmin(tail[others])])
    return k + p, k + q


def gmd(h):
    """Geometric mean decomposition of a full-rank complex matrix.

    Parameters
    ----------
    h : array_like, shape (M, N)

    Returns
    -------
    GmdResult
        ``h = q @ r @ p^H`` with ``K = min(M, N)`` layers.

    Raises
    ------
    RankDeficiencyError
        If any singular value is below ``RANK_TOL * sigma_max``.
    """
    h = check_matrix(h, "h")
    dec = svd(h)
    sigma = dec.sigma
    small = np.flatnonzero(sigma <= RANK_TOL * sigma[0])
    if small.size:
        raise RankDeficiencyError(
            f"channel is rank deficient: singular value {small[0]} is "
            f"{sigma[small[0]]:.3e} (max {sigma[0]:.3e})",
            index=int(small[0]),
        )
    k_layers = sigma.size
    sigma_bar = geometric_mean(sigma)
    q = dec.u.copy()
    p = dec.v.copy()
    r = np.diag(sigma.astype(float))

    for k in range(k_layers - 1):
        diag = np.diag(r).copy()
        i, j = _pick_pair(diag, k, sigma_bar)
        perm = np.arange(k_layers)
        # bring i to slot k and j to slot k+1
        perm[[k, i]] = perm[[i, k]]
        if j == k:
            j = i
        perm[[k + 1, j]] = perm[[j, k + 1]]
        r = r[np.ix_(perm, perm)]
        q = q[:, perm]
        p = p[:, perm]

        d1, d2 = r[k, k], r[k + 1, k + 1]
        c, s, r2 = two_by_two_step(d1, d2, sigma_bar)
        g2 = np.array([[c, -s], [s, c]])
        g1 = np.array([[c * d1, -s * d2], [s * d2, c * d1]]) / sigma_bar
        # rows above k carry off-diagonal entries in columns k, k+1
        r[:k, k:k + 2] = r[:k, k:k + 2] @ g2
        r[k:k + 2, k:k + 2] = r2
        q[:, k:k + 2] = q[:, k:k + 2] @ g1
        p[:, k:k + 2] = p[:, k:k + 2] @ g2
    return GmdResult(q=q, r=r, p=p, sigma_bar=sigma_bar)


class GeometricMeanDecomposition(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`gmd`.

    ``fit`` decomposes a channel matrix. ``transform`` maps a block of
    received vectors (one per row) to ``Q^H y``, the triangular-channel
    observation ``R x + z``.

    Attributes
    ----------
    q_, r_, p_ : ndarray
        Factors of the fitted channel.
    sigma_bar_ : float
        Common diagonal value of ``r_``.
    """

    def fit(self, X, y=None):
        res = gmd(X)
        self.q_, self.r_, self.p_ = res.q, res.r, res.p
        self.sigma_bar_ = res.sigma_bar
        self.n_layers_ = res.n_layers
        return self

    def transform(self, X):
        check_is_fitted(self, "q_")
        block, single = check_block(X, self.q_.shape[0], "X")
        out = block @ self.q_.conj()
        return out[0] if single else out

    def result(self):
        check_is_fitted(self, "q_")
        return GmdResult(q=self.q_, r=self.r_, p=self.p_, sigma_bar=self.sigma_bar_)
