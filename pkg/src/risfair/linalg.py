"""Dense complex linear-algebra kernels.

Matrices are plain ``numpy`` complex arrays. ``vec`` uses column-major
(Fortran) stacking everywhere, so the diagonal entry ``n`` of an ``N x N``
matrix lands at 0-based position ``n * (N + 1)``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

DEFAULT_PINV_RTOL = 1e-12


class LinAlgFailure(RuntimeError):
    """Raised when a factorization fails or a system is numerically singular."""


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array (1-D input becomes a column)."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array with shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def pinv(a, rel_tol: float = DEFAULT_PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``rel_tol * sigma_max`` are treated as zero.
    """
    a = as_matrix(a)
    if a.size == 0:
        raise ValueError("pinv of an empty matrix")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"SVD did not converge for {a.shape[0]}x{a.shape[1]} matrix") from exc
    cutoff = rel_tol * (s[0] if s.size else 0.0)
    s_inv = np.zeros_like(s)
    keep = s > cutoff
    s_inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * s_inv) @ u.conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def vec(a) -> np.ndarray:
    """Column-major stacking into an ``(rows*cols) x 1`` column."""
    a = as_matrix(a)
    return a.reshape(-1, 1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def diag_index(n: int, size: int) -> int:
    """0-based position of diagonal entry ``n`` inside ``vec`` of a ``size x size`` matrix.

    This is the 1-based map ``l(n) = n + size*(n-1)`` shifted to 0-based.
    """
    return n * (size + 1)


def fro_norm_sq(a) -> float:
    v = vec(a)
    return float(np.real(v.conj().T @ v)[0, 0])


def solve_hermitian_psd(m, rhs, ridge: float = 1e-12) -> tuple[np.ndarray, bool]:
    """Solve ``m x = rhs`` for Hermitian PSD ``m``.

    A Cholesky factorization is tried first. If it fails, ``ridge * trace(m)/n``
    is added to the diagonal and the solve is retried. Returns the solution and
    a flag telling whether the ridge was needed.
    """
    m = as_matrix(m)
    rhs = np.asarray(rhs, dtype=np.complex128)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError(f"expected square matrix, got {m.shape}")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    squeeze = rhs.ndim == 1
    b = rhs.reshape(n, -1)
    try:
        c = np.linalg.cholesky(m)
        x = _chol_solve(c, b)
        ridged = False
    except np.linalg.LinAlgError:
        shift = ridge * max(np.real(np.trace(m)) / n, np.finfo(float).tiny)
        try:
            c = np.linalg.cholesky(m + shift * np.eye(n))
        except np.linalg.LinAlgError as exc:
            cond = np.linalg.cond(m)
            raise LinAlgFailure(f"singular system even after ridge (cond ~ {cond:.3e})") from exc
        x = _chol_solve(c, b)
        ridged = True
    return (x.reshape(-1) if squeeze else x), ridged


def _chol_solve(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    w = solve_triangular(c, b, lower=True)
    return solve_triangular(c.conj().T, w, lower=False)
