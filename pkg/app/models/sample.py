"""One observed column of the data stream."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SampleVector:
    """Observed column z, with an observation mask in completion mode (True = observed)."""

    values: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != self.values.shape:
                raise ValueError(f"mask shape {mask.shape} does not match values shape {self.values.shape}")
            object.__setattr__(self, "mask", mask)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def is_masked(self) -> bool:
        return self.mask is not None

    def observed_values(self) -> np.ndarray:
        """Values with unobserved coordinates set to zero."""
        if self.mask is None:
            return self.values
        return np.where(self.mask, self.values, 0.0)
