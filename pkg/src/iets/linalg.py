"""Dense complex matrix helpers and a one-sided Jacobi SVD.

Matrices are plain ``numpy`` complex arrays; :func:`check_matrix` enforces
the finiteness invariant at every public entry point.

Singular values are used throughout (``sigma_i = sqrt(lambda_i)`` where
``lambda_i`` are eigenvalues of the Wishart matrix ``H^H H``).
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix
from .exceptions import ConvergenceError, DimensionError

__all__ = [
    "SvdResult",
    "matmul",
    "hermitian",
    "svd",
    "frobenius_norm",
    "condition_number",
    "pinv",
]

JACOBI_TOL = 1e-14
MAX_SWEEPS = 60
# first entry above this magnitude (unit-norm column) carries the phase
_PHASE_TOL = 1e-12


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``a = u @ diag(sigma) @ v^H``.

    Attributes
    ----------
    u : ndarray, shape (M, K)
        Left singular vectors, orthonormal columns.
    sigma : ndarray, shape (K,)
        Nonnegative singular values in descending order.
    v : ndarray, shape (N, K)
        Right singular vectors, orthonormal columns. The first nonzero
        entry of each column is real and nonnegative.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.conj().T


def matmul(a, b):
    """Matrix product with a shape check that names both operands."""
    a = check_matrix(a, "a")
    b = check_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def hermitian(a):
    """Conjugate transpose."""
    return check_matrix(a, "a").conj().T


def frobenius_norm(a):
    a = check_matrix(a, "a", allow_empty=True)
    return float(np.sqrt(np.sum(a.real**2 + a.imag**2)))


def _rotate_pair(w, v, i, j, alpha, beta, gamma):
    # Diagonalise the 2x2 Gram block [[alpha, gamma], [conj(gamma), beta]]:
    # strip the phase of gamma, then apply the real symmetric Jacobi rotation.
    g = abs(gamma)
    phase = gamma / g
    zeta = (beta - alpha) / (2.0 * g)
    t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = c * t
    sp = s / phase  # s * e^{-i phi}
    cp = c / phase
    for mat in (w, v):
        wi = mat[i].copy()
        wj = mat[j]
        mat[i] = c * wi - sp * wj
        mat[j] = s * wi + cp * wj


def _jacobi(a):
    """One-sided Jacobi on a tall matrix (rows >= cols).

    Works on the transposed copy so each column is a contiguous row.
    Returns unsorted column-norm singular values, the orthogonalised
    columns, and the accumulated right rotations (both transposed).
    """
    m, n = a.shape
    w = a.T.copy()
    v = np.eye(n, dtype=np.complex128)
    scale = np.sqrt(np.sum(np.abs(a) ** 2))
    # columns at or below roundoff of the whole matrix count as zero
    floor = (n * np.finfo(float).eps * scale) ** 2
    residual = 0.0
    for _ in range(MAX_SWEEPS):
        residual = 0.0
        norms = np.einsum("ij,ij->i", w.conj(), w).real
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha, beta = norms[i], norms[j]
                if alpha <= floor or beta <= floor:
                    continue
                gamma = np.vdot(w[i], w[j])
                rel = abs(gamma) / np.sqrt(alpha * beta)
                if rel <= JACOBI_TOL:
                    continue
                residual = max(residual, rel)
                _rotate_pair(w, v, i, j, alpha, beta, gamma)
                norms[i] = np.vdot(w[i], w[i]).real
                norms[j] = np.vdot(w[j], w[j]).real
        if residual == 0.0:
            return w, v
    raise ConvergenceError(
        f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps "
        f"(residual {residual:.3e})",
        residual,
    )


def _complete_orthonormal(u, missing):
    """Replace the columns listed in ``missing`` with an orthonormal completion."""
    m = u.shape[0]
    keep = [k for k in range(u.shape[1]) if k not in missing]
    basis = [u[:, k] for k in keep]
    candidates = iter(np.eye(m, dtype=np.complex128))
    for k in missing:
        while True:
            e = next(candidates)
            for _ in range(2):
                for b in basis:
                    e = e - np.vdot(b, e) * b
            nrm = np.linalg.norm(e)
            if nrm > 1e-8:
                e = e / nrm
                break
        basis.append(e)
        u[:, k] = e
    return u


def svd(a):
    """Thin singular value decomposition by cyclic one-sided Jacobi sweeps.

    Parameters
    ----------
    a : array_like, shape (M, N)
        Finite complex matrix.

    Returns
    -------
    SvdResult
        ``K = min(M, N)`` singular triplets. Zero singular values are kept
        and their left vectors are completed to an orthonormal set.

    Raises
    ------
    ConvergenceError
        If ``MAX_SWEEPS`` sweeps leave a relative Gram off-diagonal term
        above ``JACOBI_TOL``.
    """
    a = check_matrix(a, "a")
    wide = a.shape[0] < a.shape[1]
    work = a.conj().T if wide else a
    w, vt = _jacobi(work)
    sigma = np.sqrt(np.einsum("ij,ij->i", w.conj(), w).real)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    w = w[order]
    v = vt[order].T.copy()

    m = work.shape[0]
    tiny = max(work.shape) * np.finfo(float).eps * (sigma[0] if sigma.size else 0.0)
    u = np.zeros((m, sigma.size), dtype=np.complex128)
    missing = []
    for k, s in enumerate(sigma):
        if s > tiny and s > 0.0:
            u[:, k] = w[k] / s
        else:
            missing.append(k)
    if missing:
        u = _complete_orthonormal(u, missing)

    if wide:
        u, v = v, u
    for k in range(sigma.size):
        col = v[:, k]
        nz = np.flatnonzero(np.abs(col) > _PHASE_TOL)
        if nz.size:
            ph = col[nz[0]] / abs(col[nz[0]])
            v[:, k] = col / ph
            u[:, k] = u[:, k] / ph
            v[nz[0], k] = abs(v[nz[0], k])
    return SvdResult(u=u, sigma=sigma, v=v)


def condition_number(a):
    """``sigma_max / sigma_min``; ``inf`` for a rank-deficient input."""
    sigma = svd(a).sigma
    if sigma[-1] <= max(a.shape) * np.finfo(float).eps * sigma[0]:
        return float("inf")
    return float(sigma[0] / sigma[-1])


def pinv(a, rcond=1e-12):
    """Moore-Penrose pseudoinverse built on :func:`svd`.

    Singular values below ``rcond * sigma_max`` are treated as zero.
    """
    res = svd(a)
    cutoff = rcond * res.sigma[0]
    inv = np.where(res.sigma > cutoff, 1.0 / np.where(res.sigma > 0, res.sigma, 1.0), 0.0)
    return (res.v * inv) @ res.u.conj().T
