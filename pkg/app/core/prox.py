r"""Closed-form proximal operators of the noise penalties.

Each operator solves

    prox(v) = argmin_e 1/2 ||v - e||^2 + penalty(e)

for one of the admissible column penalties: the l1 norm, the l2 norm of the
column, and the masked l1 norm used by the completion reformulation. All of
them are pure functions of their arguments.
"""
import logging

import numpy as np

from app.core.exceptions import DimensionMismatchError
from app.schemas.regularizer import RegularizerSpec

logger = logging.getLogger(__name__)


def soft_threshold(v: np.ndarray, tau: float | np.ndarray) -> np.ndarray:
    """Entrywise shrinkage sign(v) * max(|v| - tau, 0).

    ``tau`` may be a scalar or a per-coordinate array of thresholds.
    """
    v = np.asarray(v, dtype=np.float64)
    if np.all(np.asarray(tau) == 0):
        return v.copy()
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def l2_column_shrink(v: np.ndarray, tau: float) -> np.ndarray:
    """Group shrinkage: 0 if ||v|| <= tau, else (||v|| - tau) / ||v|| * v."""
    v = np.asarray(v, dtype=np.float64)
    if tau == 0:
        return v.copy()
    norm = float(np.linalg.norm(v))
    if norm <= tau:
        return np.zeros_like(v)
    return ((norm - tau) / norm) * v


def masked_soft_threshold(v: np.ndarray, spec: RegularizerSpec) -> np.ndarray:
    """Soft threshold at c on observed coordinates and at 1/c on the rest."""
    if spec.kind != "masked_l1":
        raise ValueError(f"masked_soft_threshold needs a masked_l1 spec, got {spec.kind}")
    v = np.asarray(v, dtype=np.float64)
    if spec.mask.shape[0] != v.shape[0]:
        raise DimensionMismatchError(
            f"mask has length {spec.mask.shape[0]} but the residual has length {v.shape[0]}"
        )
    return soft_threshold(v, spec.weights())


def apply_prox(v: np.ndarray, spec: RegularizerSpec) -> np.ndarray:
    """Dispatch to the proximal operator of ``spec``."""
    if spec.kind == "l1":
        return soft_threshold(v, spec.lambda2)
    if spec.kind == "l2":
        return l2_column_shrink(v, spec.lambda2)
    return masked_soft_threshold(v, spec)


def noise_penalty(e: np.ndarray, spec: RegularizerSpec) -> float:
    """Value of the penalty whose proximal operator ``apply_prox`` computes."""
    if spec.kind == "l1":
        return spec.lambda2 * float(np.abs(e).sum())
    if spec.kind == "l2":
        return spec.lambda2 * float(np.linalg.norm(e))
    return float(np.dot(spec.weights(), np.abs(e)))
