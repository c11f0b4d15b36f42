"""Per-sample coefficient and noise solver.

Solves

    min_{r, e}  1/2 ||z - L r - e||^2 + penalty(e)   s.t.  ||r||_2 <= 1

by block coordinate descent: an r-step (ridge candidate, or a bisection on
the ball multiplier when the candidate is infeasible) followed by an e-step
(the proximal operator of the penalty applied to z - L r).

Multipliers share one eigendecomposition of L^T L:

    L^T L = V diag(w) V^T
    r(eta) = V diag(1 / (w + eta)) V^T L^T (z - e)

so every multiplier costs O(d) once the projection V^T L^T (z - e) is known.
"""
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from app.core.exceptions import (
    BisectionStallWarning,
    DescentViolationError,
    DimensionMismatchError,
    SingularSystemError,
)
from app.core.prox import apply_prox, noise_penalty
from app.models.coeff import CoeffNoisePair
from app.schemas.regularizer import RegularizerSpec
from app.schemas.solver import SolverConfig

logger = logging.getLogger(__name__)

# Allowed increase of a descent objective between iterates, relative to its size.
DESCENT_SLACK = 1e-12
# Largest number of doublings tried when bracketing the multiplier.
_MAX_DOUBLINGS = 1100
# Initial half-width of a bracket grown around a previous multiplier.
_WARM_SPREAD = 1e-3


@dataclass(frozen=True)
class SpectralGram:
    """Eigendecomposition of L^T L, reused for every multiplier of one solve."""

    L: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    floor: float

    @classmethod
    def from_basis(cls, L: np.ndarray) -> "SpectralGram":
        w, V = scipy.linalg.eigh(L.T @ L)
        w = np.maximum(w, 0.0)
        floor = np.finfo(np.float64).eps * max(float(w.max(initial=0.0)), 1.0) * len(w)
        return cls(L=L, eigenvalues=w, eigenvectors=V, floor=floor)

    def project(self, y: np.ndarray) -> np.ndarray:
        """Coordinates of L^T y in the eigenbasis."""
        return self.eigenvectors.T @ (self.L.T @ y)

    def _denominator(self, shift: float) -> np.ndarray:
        # eigh returns ascending eigenvalues, so the first denominator is the smallest
        if self.eigenvalues[0] + shift <= self.floor:
            raise SingularSystemError(
                f"L^T L + {shift:g} I is singular; use a positive jitter for rank-deficient bases"
            )
        return self.eigenvalues + shift

    def solve(self, coords: np.ndarray, shift: float) -> np.ndarray:
        """r(shift) = (L^T L + shift I)^{-1} L^T y from projected coordinates."""
        return self.eigenvectors @ (coords / self._denominator(shift))

    def norm(self, coords: np.ndarray, shift: float) -> float:
        """||r(shift)||_2 without forming r."""
        return self.norm_from_squares(coords * coords, shift)

    def norm_from_squares(self, squares: np.ndarray, shift: float) -> float:
        denom = self._denominator(shift)
        return math.sqrt(float(np.dot(squares, 1.0 / (denom * denom))))


def gram_spectrum(L: np.ndarray) -> SpectralGram:
    """Eigendecomposition of L^T L, computed once and shared by every multiplier."""
    return SpectralGram.from_basis(np.asarray(L, dtype=np.float64))


def ridge_candidate(L: np.ndarray, z: np.ndarray, e: np.ndarray, epsilon: float) -> np.ndarray:
    """Unconstrained minimizer (L^T L + eps I)^{-1} L^T (z - e) via Cholesky.

    Raises:
        SingularSystemError: If the system is not positive definite
            (epsilon = 0 with a rank-deficient L).
    """
    L = np.asarray(L, dtype=np.float64)
    gram = L.T @ L + epsilon * np.eye(L.shape[1])
    rhs = L.T @ (np.asarray(z, dtype=np.float64) - np.asarray(e, dtype=np.float64))
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"ridge system is not positive definite: {exc}") from exc
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def _bracket(gram: SpectralGram, squares: np.ndarray, floor: float, start: float) -> tuple[float, float]:
    """Multipliers (lower, upper) with ||r(lower)|| > 1 >= ||r(upper)||.

    ``floor`` is a multiplier already known to be infeasible. A ``start``
    above it grows the bracket geometrically around it; otherwise the upper
    end is doubled from max(1, 2 floor).
    """
    if start <= floor:
        lower = floor
        upper = max(1.0, 2.0 * floor)
        for _ in range(_MAX_DOUBLINGS):
            if gram.norm_from_squares(squares, upper) <= 1.0:
                break
            lower = upper
            upper *= 2.0
        return lower, upper

    width = _WARM_SPREAD * start
    if gram.norm_from_squares(squares, start) <= 1.0:
        upper = start
        lower = max(upper - width, floor)
        for _ in range(_MAX_DOUBLINGS):
            if lower <= floor or gram.norm_from_squares(squares, lower) > 1.0:
                break
            upper = lower
            width *= 2.0
            lower = max(upper - width, floor)
        return lower, upper

    lower = start
    upper = start + width
    for _ in range(_MAX_DOUBLINGS):
        if gram.norm_from_squares(squares, upper) <= 1.0:
            break
        lower = upper
        width *= 2.0
        upper = lower + width
    return lower, upper


def _bisect_multiplier(
    gram: SpectralGram, coords: np.ndarray, config: SolverConfig, start: float = 0.0
) -> tuple[float, bool]:
    """Find eta with 1 - tol <= ||r(eta)|| <= 1; ||r(eta)|| decreases strictly in eta.

    Returns the multiplier and whether the iteration cap was hit. The
    returned multiplier is always the feasible end of the bracket.
    """
    squares = coords * coords
    lower, upper = _bracket(gram, squares, config.epsilon_jitter, start)

    for _ in range(config.bisection_max_iters):
        middle = 0.5 * (lower + upper)
        if not lower < middle < upper:
            break
        gap = gram.norm_from_squares(squares, middle) - 1.0
        if gap > 0:
            lower = middle
            continue
        upper = middle
        if gap >= -config.bisection_tol:
            return upper, False

    logger.warning(
        "Bisection stalled after %d iterations (bracket [%g, %g])",
        config.bisection_max_iters, lower, upper,
    )
    return upper, True


def constrained_r(
    L: np.ndarray, z: np.ndarray, e: np.ndarray, config: SolverConfig
) -> tuple[np.ndarray, float]:
    """Coefficients on the unit ball and their multiplier.

    If the ridge candidate is already feasible it is returned with eta = 0.
    Otherwise eta > 0 solves ||(L^T L + eta I)^{-1} L^T (z - e)||_2 = 1.
    Emits ``BisectionStallWarning`` when the iteration cap is reached.
    """
    L = np.asarray(L, dtype=np.float64)
    gram = gram_spectrum(L)
    coords = gram.project(np.asarray(z, dtype=np.float64) - np.asarray(e, dtype=np.float64))
    if gram.norm(coords, config.epsilon_jitter) <= 1.0:
        return gram.solve(coords, config.epsilon_jitter), 0.0
    eta, stalled = _bisect_multiplier(gram, coords, config)
    if stalled:
        warnings.warn(
            f"multiplier search hit {config.bisection_max_iters} iterations",
            BisectionStallWarning,
            stacklevel=2,
        )
    return gram.solve(coords, eta), eta


def coefficient_objective(
    L: np.ndarray, z: np.ndarray, r: np.ndarray, e: np.ndarray, spec: RegularizerSpec, epsilon: float = 0.0
) -> float:
    """Block objective 1/2 ||z - L r - e||^2 + penalty(e) + eps/2 ||r||^2."""
    residual = z - L @ r - e
    return 0.5 * float(residual @ residual) + noise_penalty(e, spec) + 0.5 * epsilon * float(r @ r)


def sample_loss(z: np.ndarray, L: np.ndarray, r: np.ndarray, e: np.ndarray, spec: RegularizerSpec) -> float:
    """Per-sample loss 1/2 ||z - L r - e||^2 + penalty(e) at given (r, e)."""
    return coefficient_objective(L, z, r, e, spec)


def _kkt_residual(
    L: np.ndarray, z: np.ndarray, r: np.ndarray, e: np.ndarray, eta: float, epsilon: float, spec: RegularizerSpec
) -> float:
    multiplier = eta if eta > 0 else epsilon
    grad_r = L.T @ (L @ r + e - z) + multiplier * r
    prox_gap = e - apply_prox(z - L @ r, spec)
    return max(float(np.abs(grad_r).max(initial=0.0)), float(np.abs(prox_gap).max(initial=0.0)))


def solve_coeff_noise(
    L: np.ndarray, z: np.ndarray, spec: RegularizerSpec, config: SolverConfig
) -> CoeffNoisePair:
    """Alternate the r-step and the e-step from e = 0.

    Stops when max(||dr||_inf, ||de||_inf) < bcd_tol or after bcd_max_iters
    sweeps. Both steps are exact block minimizations, so the block objective
    (with the eps/2 ||r||^2 jitter) is checked to never increase. A sweep
    whose r-step lands on the sphere may lose up to eta * bisection_tol
    against the previous iterate. Within one solve the multiplier search
    starts from the previous sweep's multiplier.

    Raises:
        DimensionMismatchError: If z or the mask disagree with L.
        SingularSystemError: If epsilon = 0 and L is rank-deficient.
        DescentViolationError: If a sweep raises the block objective.
    """
    L = np.asarray(L, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    p, d = L.shape
    if z.shape != (p,):
        raise DimensionMismatchError(f"sample has shape {z.shape}, expected ({p},)")
    if spec.kind == "masked_l1":
        if spec.mask.shape != (p,):
            raise DimensionMismatchError(f"mask has shape {spec.mask.shape}, expected ({p},)")
        if not spec.mask.any():
            logger.warning("Sample has no observed entries; solving it unchanged")

    epsilon = config.epsilon_jitter
    gram = gram_spectrum(L)
    r = np.zeros(d)
    e = np.zeros(p)
    eta = 0.0
    stalled = False
    iterations = 0
    objective = 0.5 * float(z @ z)

    for iterations in range(1, config.bcd_max_iters + 1):
        coords = gram.project(z - e)
        hit_cap = False
        if gram.norm(coords, epsilon) <= 1.0:
            eta = 0.0
            r_new = gram.solve(coords, epsilon)
        else:
            eta, hit_cap = _bisect_multiplier(gram, coords, config, start=eta)
            stalled = stalled or hit_cap
            r_new = gram.solve(coords, eta)
        fitted = z - L @ r_new
        e_new = apply_prox(fitted, spec)

        residual = fitted - e_new
        new_objective = (
            0.5 * float(residual @ residual) + noise_penalty(e_new, spec) + 0.5 * epsilon * float(r_new @ r_new)
        )
        slack = DESCENT_SLACK * max(1.0, abs(objective)) + eta * config.bisection_tol
        if not hit_cap and new_objective - objective > slack:
            raise DescentViolationError(
                f"coefficient sweep {iterations} raised the block objective from {objective:.12g} to {new_objective:.12g}"
            )
        objective = new_objective

        change = max(float(np.abs(r_new - r).max(initial=0.0)), float(np.abs(e_new - e).max(initial=0.0)))
        r, e = r_new, e_new
        if change < config.bcd_tol:
            break

    if stalled:
        warnings.warn("multiplier search stalled during the r-step", BisectionStallWarning, stacklevel=2)

    return CoeffNoisePair(
        r=r,
        e=e,
        eta=eta,
        iterations=iterations,
        kkt_residual=_kkt_residual(L, z, r, e, eta, epsilon, spec),
        stalled=stalled,
    )
