"""Basis update by block coordinate descent on the surrogate.

With unnormalized accumulators A = sum r r^T and B = sum (z - e) r^T the
surrogate after t samples is

    g_t(L) = (1/t) [1/2 tr(L^T L A) - tr(L^T B)] + lambda1/(2t) ||L||_{2,inf}^2 + C_t / t

where C_t is the running sum of the L-free per-sample terms.
"""
import logging

import numpy as np
import scipy.linalg
import scipy.optimize

from app.models.basis import BasisState
from app.schemas.solver import SolverConfig

logger = logging.getLogger(__name__)

# Columns whose coefficient energy A_jj is below this are left untouched.
MIN_COLUMN_ENERGY = 1e-12
# Relative tolerance for treating two row norms as tied for the maximum.
TIE_RTOL = 1e-10


def max_row_norm_subgradient(L: np.ndarray) -> np.ndarray:
    """Subgradient Q L of 1/2 ||L||_{2,inf}^2.

    Q is diagonal with weight 1/|I| on each row in the arg-max set I of the
    row norms and zero elsewhere, so tr(Q) = 1 and <Q L, L> = ||L||_{2,inf}^2.
    """
    L = np.asarray(L, dtype=np.float64)
    row_norms = np.linalg.norm(L, axis=1)
    top = float(row_norms.max(initial=0.0))
    if top == 0.0:
        return np.zeros_like(L)
    ties = row_norms >= top * (1.0 - TIE_RTOL)
    weights = ties / ties.sum()
    return weights[:, None] * L


def max_row_norm_sq(L: np.ndarray) -> float:
    """||L||_{2,inf}^2, the largest squared row norm."""
    return float(np.einsum("ij,ij->i", L, L).max(initial=0.0))


def basis_objective(L: np.ndarray, A: np.ndarray, B: np.ndarray, lambda1: float) -> float:
    """1/2 tr(L^T L A) - tr(L^T B) + lambda1/2 ||L||_{2,inf}^2 (t times g_t, minus C_t)."""
    quadratic = 0.5 * float(np.sum((L.T @ L) * A))
    linear = float(np.sum(L * B))
    return quadratic - linear + 0.5 * lambda1 * max_row_norm_sq(L)


def surrogate_value(state: BasisState, lambda1: float, history_free: bool = True) -> float:
    """Value of g_t at the current basis.

    With ``history_free`` the running constant is included, giving the full
    surrogate without any stored samples; otherwise only the L-dependent part
    that the basis update minimizes is returned.
    """
    if state.t < 1:
        raise ValueError("the surrogate is defined after at least one sample")
    value = basis_objective(state.L, state.A, state.B, lambda1) / state.t
    if history_free:
        value += state.loss_constant / state.t
    return value


def state_nbytes(state: BasisState) -> int:
    return state.nbytes()


def _column_objective(x: np.ndarray, center: np.ndarray, rest_sq: np.ndarray, a_jj: float, lambda1: float) -> float:
    gap = x - center
    return 0.5 * a_jj * float(gap @ gap) + 0.5 * lambda1 * float(np.max(rest_sq + x * x))


def _exact_column_minimizer(center: np.ndarray, rest_sq: np.ndarray, a_jj: float, lambda1: float) -> np.ndarray:
    """argmin_x 1/2 a ||x - c||^2 + lambda1/2 max_i (s_i + x_i^2).

    For a fixed level M = max_i (s_i + x_i^2) the best x clips c to
    |x_i| <= sqrt(M - s_i); the remaining problem in M is convex and
    one-dimensional.
    """
    if lambda1 == 0.0:
        return center.copy()
    level_lo = float(rest_sq.max())
    level_hi = float(np.max(rest_sq + center * center))
    if level_hi <= level_lo:
        return center.copy()

    def clipped(level: float) -> np.ndarray:
        radius = np.sqrt(np.maximum(level - rest_sq, 0.0))
        return np.clip(center, -radius, radius)

    def profile(level: float) -> float:
        gap = clipped(level) - center
        return 0.5 * a_jj * float(gap @ gap) + 0.5 * lambda1 * level

    result = scipy.optimize.minimize_scalar(
        profile,
        bounds=(level_lo, level_hi),
        method="bounded",
        options={"xatol": 1e-12 * max(level_hi, 1.0)},
    )
    levels = [level_lo, float(result.x), level_hi]
    best = min(levels, key=profile)
    return clipped(best)


def _update_column(L: np.ndarray, A: np.ndarray, B: np.ndarray, j: int, lambda1: float) -> float:
    """Update column j in place; returns the largest entry change."""
    a_jj = float(A[j, j])
    column = L[:, j].copy()
    gradient = L @ A[:, j] - B[:, j]
    center = column - gradient / a_jj
    rest_sq = np.einsum("ij,ij->i", L, L) - column * column

    subgradient = max_row_norm_subgradient(L)[:, j]
    candidate = column - (gradient + lambda1 * subgradient) / a_jj

    current_value = _column_objective(column, center, rest_sq, a_jj, lambda1)
    if _column_objective(candidate, center, rest_sq, a_jj, lambda1) > current_value:
        candidate = _exact_column_minimizer(center, rest_sq, a_jj, lambda1)
        if _column_objective(candidate, center, rest_sq, a_jj, lambda1) > current_value:
            return 0.0

    L[:, j] = candidate
    return float(np.abs(candidate - column).max(initial=0.0))


def max_row_norm_prox(V: np.ndarray, mu: float) -> np.ndarray:
    """argmin_L 1/2 ||L - V||_F^2 + mu/2 ||L||_{2,inf}^2.

    Rows longer than a common level rho are scaled back to length rho and
    the rest are kept. With the row norms sorted as s_1 >= s_2 >= ..., the
    level is rho = (s_1 + ... + s_k) / (mu + k) for the unique k with
    s_k > rho >= s_{k+1}.
    """
    V = np.asarray(V, dtype=np.float64)
    norms = np.linalg.norm(V, axis=1)
    if mu <= 0.0 or float(norms.max(initial=0.0)) == 0.0:
        return V.copy()
    ordered = np.sort(norms)[::-1]
    levels = np.cumsum(ordered) / (mu + np.arange(1, len(ordered) + 1))
    following = np.append(ordered[1:], 0.0)
    valid = np.flatnonzero((ordered > levels) & (levels >= following))
    level = float(levels[valid[0]]) if valid.size else float(levels[-1])
    scale = np.minimum(1.0, level / np.maximum(norms, np.finfo(np.float64).tiny))
    return scale[:, None] * V


def _joint_step(L: np.ndarray, A: np.ndarray, B: np.ndarray, lambda1: float) -> float:
    """One proximal gradient step on all of L with step 1/||A||_2; in place.

    Moves rows tied at the maximal norm together, which a single-column
    update cannot do. Returns the largest entry change, or 0 if the step
    would not lower the objective.
    """
    lipschitz = float(scipy.linalg.eigvalsh(A)[-1])
    if lipschitz < MIN_COLUMN_ENERGY:
        return 0.0
    candidate = max_row_norm_prox(L - (L @ A - B) / lipschitz, lambda1 / lipschitz)
    if basis_objective(candidate, A, B, lambda1) > basis_objective(L, A, B, lambda1):
        return 0.0
    change = float(np.abs(candidate - L).max(initial=0.0))
    L[...] = candidate
    return change


def update_basis(state: BasisState, config: SolverConfig) -> BasisState:
    """Descent on g_t; updates ``state.L`` in place and returns the state.

    A pass is one column-wise sweep followed by a joint proximal gradient
    step. One pass runs once t exceeds the burn-in, otherwise up to
    ``basis_max_passes`` passes until no entry moves by more than
    ``basis_pass_tol``. Columns with A_jj < 1e-12 carry no coefficient
    energy and are skipped by the sweep.
    """
    if state.t < 1:
        raise ValueError("update_basis needs at least one accumulated sample")
    lambda1 = config.require_lambda1()
    passes = 1 if state.t > config.basis_burn_in else config.basis_max_passes

    for _ in range(passes):
        largest_change = 0.0
        for j in range(state.d):
            if state.A[j, j] < MIN_COLUMN_ENERGY:
                logger.debug("Skipping basis column %d: no coefficient energy", j)
                continue
            largest_change = max(largest_change, _update_column(state.L, state.A, state.B, j, lambda1))
        largest_change = max(largest_change, _joint_step(state.L, state.A, state.B, lambda1))
        if largest_change < config.basis_pass_tol:
            break

    if logger.isEnabledFor(logging.DEBUG):
        smallest = float(np.linalg.eigvalsh(state.A / state.t).min())
        logger.debug("t=%d smallest eigenvalue of A/t: %.3e", state.t, smallest)
    return state
