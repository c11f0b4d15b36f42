"""Basis state kept in memory across the stream."""
from dataclasses import dataclass

import numpy as np


@dataclass
class BasisState:
    """Basis L with the accumulators that summarize every past sample.

    Stores:
    - L (p x d): current basis
    - A (d x d): sum of r r^T
    - B (p x d): sum of (z - e) r^T
    - t: number of samples folded in
    - loss_constant: sum of 1/2 ||z - e||^2 + penalty(e), the L-free part of
      the surrogate

    The accumulators are unnormalized; the 1/t factor is applied by readers.
    Size is O(pd + d^2) whatever t is.
    """

    L: np.ndarray
    A: np.ndarray
    B: np.ndarray
    t: int = 0
    loss_constant: float = 0.0

    @property
    def p(self) -> int:
        return self.L.shape[0]

    @property
    def d(self) -> int:
        return self.L.shape[1]

    def nbytes(self) -> int:
        """Resident size of the state in bytes (arrays plus the two scalars)."""
        return self.L.nbytes + self.A.nbytes + self.B.nbytes + 2 * 8

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BasisState):
            return NotImplemented
        return (
            self.t == other.t
            and self.loss_constant == other.loss_constant
            and np.array_equal(self.L, other.L)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
        )

    def __repr__(self) -> str:
        return f"<BasisState(p={self.p}, d={self.d}, t={self.t})>"
