"""Subspace recovery metrics."""
import numpy as np
import scipy.linalg

from app.core.exceptions import DimensionMismatchError


def expressed_variance(U: np.ndarray, L: np.ndarray) -> float:
    """Fraction of the energy of U captured by span(L): tr(P_L U U^T) / tr(U U^T).

    L is orthonormalized first (rank-revealing), so the value depends only on
    span(L) and lies in [0, 1].

    Raises:
        ValueError: If U is zero.
        DimensionMismatchError: If U and L have different row counts.
    """
    U = np.asarray(U, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if U.shape[0] != L.shape[0]:
        raise DimensionMismatchError(f"U has {U.shape[0]} rows but L has {L.shape[0]}")
    total = float(np.sum(U * U))
    if total == 0.0:
        raise ValueError("expressed variance is undefined for a zero ground-truth basis")
    if not np.any(L):
        return 0.0
    Q = scipy.linalg.orth(L)
    captured = Q.T @ U
    return min(float(np.sum(captured * captured)) / total, 1.0)
