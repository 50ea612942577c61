"""Complex transform and linear-algebra kernels shared by every module.

The forward DFT is unitary (1/sqrt(M) scaling); nothing downstream may
re-scale.  All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

# Singular values below PINV_RTOL * s_max are treated as zero everywhere a
# pseudo-inverse is taken (guards ZF against deep fades).
PINV_RTOL = 1e-10


def dft(x: np.ndarray) -> np.ndarray:
    """Unitary DFT along the last axis: F @ x with F = fft_matrix/sqrt(M)."""
    x = np.asarray(x)
    m = x.shape[-1]
    return np.fft.fft(x, axis=-1) / np.sqrt(m)


def idft(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dft` (also unitary)."""
    x = np.asarray(x)
    m = x.shape[-1]
    return np.fft.ifft(x, axis=-1) * np.sqrt(m)


def dft_matrix(m: int) -> np.ndarray:
    """Dense unitary DFT matrix, the reference route for the FFT path."""
    k = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(k, k) / m) / np.sqrt(m)


def partial_fourier(m: int, l: int) -> np.ndarray:
    """First ``l`` columns of the unnormalized DFT matrix (sqrt(M) * unitary).

    The first column is all ones; columns are pairwise orthogonal with
    squared norm ``m``.
    """
    if not 1 <= l <= m:
        raise ValueError(f"need 1 <= L <= M, got L={l}, M={m}")
    rows = np.arange(m)[:, None]
    cols = np.arange(l)[None, :]
    return np.exp(-2j * np.pi * rows * cols / m)


def row_select(mtx: np.ndarray, rows) -> np.ndarray:
    """Stack the selected rows in index order."""
    mtx = np.asarray(mtx)
    rows = np.asarray(rows, dtype=int)
    if rows.size and (rows.min() < 0 or rows.max() >= mtx.shape[0]):
        raise IndexError(f"row index out of range for {mtx.shape[0]} rows")
    return mtx[rows, :]


def pseudo_inverse(mtx: np.ndarray, rtol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD with relative cutoff ``rtol``."""
    mtx = np.asarray(mtx)
    if not np.all(np.isfinite(mtx)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.pinv(mtx, rcond=rtol)


def effective_rank(mtx: np.ndarray, rtol: float = PINV_RTOL) -> int:
    """Number of singular values above ``rtol`` times the largest."""
    s = np.linalg.svd(np.asarray(mtx), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))
