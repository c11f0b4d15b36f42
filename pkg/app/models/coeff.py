"""Per-sample solution of the coefficient/noise subproblem."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CoeffNoisePair:
    """Coefficients r (||r||_2 <= 1), structured noise e and the multiplier eta.

    ``eta`` is 0 when the ridge candidate was already feasible. ``stalled``
    is set when the multiplier search ran out of iterations.
    """

    r: np.ndarray
    e: np.ndarray
    eta: float = 0.0
    iterations: int = 0
    kkt_residual: float = 0.0
    stalled: bool = False

    @property
    def r_norm(self) -> float:
        return float(np.linalg.norm(self.r))
