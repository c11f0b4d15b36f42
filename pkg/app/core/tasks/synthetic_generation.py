"""Synthetic low-rank-plus-sparse data for subspace recovery runs."""
import logging
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from app.models.sample import SampleVector
from app.schemas.bench import SyntheticSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticData:
    """Ground truth U plus a replayable column stream of Z = U V^T + E.

    V is drawn column by column, so streaming never holds the p x n matrix.
    Corruption positions are exact: round(rho * p * n) distinct flat indices
    (column-major) with Uniform(lo, hi) values.
    """

    spec: SyntheticSpec
    U: np.ndarray
    corrupt_index: np.ndarray  # sorted flat indices, column j covers [j*p, (j+1)*p)
    corrupt_value: np.ndarray
    observed_index: np.ndarray | None  # sorted flat indices of observed entries

    @property
    def corruption_count(self) -> int:
        return int(self.corrupt_index.size)

    def _column_slice(self, index: np.ndarray, j: int) -> tuple[int, int]:
        p = self.spec.p
        return int(np.searchsorted(index, j * p)), int(np.searchsorted(index, (j + 1) * p))

    def columns(self) -> Iterator[SampleVector]:
        """Yield the columns of Z in order; every call replays the same stream."""
        p = self.spec.p
        rng_v = np.random.default_rng(_child_seeds(self.spec.seed)[1])
        for j in range(self.spec.n):
            v = rng_v.standard_normal(self.spec.d_true)
            column = self.U @ v
            lo, hi = self._column_slice(self.corrupt_index, j)
            column[self.corrupt_index[lo:hi] - j * p] += self.corrupt_value[lo:hi]
            mask = None
            if self.observed_index is not None:
                mask = np.zeros(p, dtype=bool)
                lo, hi = self._column_slice(self.observed_index, j)
                mask[self.observed_index[lo:hi] - j * p] = True
            yield SampleVector(values=column, mask=mask)

    def matrix(self) -> np.ndarray:
        """Materialize Z; for tests and small instances only."""
        return np.column_stack([sample.values for sample in self.columns()]) if self.spec.n else np.zeros((self.spec.p, 0))

    def low_rank(self) -> np.ndarray:
        """Materialize X = U V^T."""
        rng_v = np.random.default_rng(_child_seeds(self.spec.seed)[1])
        V = np.array([rng_v.standard_normal(self.spec.d_true) for _ in range(self.spec.n)]).reshape(self.spec.n, self.spec.d_true)
        return self.U @ V.T

    def corruption(self) -> np.ndarray:
        """Materialize the sparse corruption E."""
        E = np.zeros(self.spec.p * self.spec.n)
        E[self.corrupt_index] = self.corrupt_value
        return E.reshape(self.spec.n, self.spec.p).T


def _child_seeds(seed: int) -> list[np.random.SeedSequence]:
    # U, V, corruption, observation mask
    return np.random.SeedSequence(seed).spawn(4)


def generate(spec: SyntheticSpec) -> SyntheticData:
    """Draw U, the corruption pattern and the optional observation mask for ``spec``."""
    seeds = _child_seeds(spec.seed)
    U = np.random.default_rng(seeds[0]).standard_normal((spec.p, spec.d_true))

    total = spec.p * spec.n
    rng_e = np.random.default_rng(seeds[2])
    count = int(round(spec.rho * total))
    corrupt_index = np.sort(rng_e.choice(total, size=count, replace=False)) if count else np.zeros(0, dtype=np.int64)
    lo, hi = spec.corruption_range
    corrupt_value = rng_e.uniform(lo, hi, size=count)

    observed_index = None
    if spec.observed_fraction is not None:
        rng_m = np.random.default_rng(seeds[3])
        observed = int(round(spec.observed_fraction * total))
        observed_index = np.sort(rng_m.choice(total, size=observed, replace=False))

    logger.debug("Generated synthetic spec %s with %d corrupted entries", spec.fingerprint(), count)
    return SyntheticData(
        spec=spec,
        U=U,
        corrupt_index=corrupt_index.astype(np.int64),
        corrupt_value=corrupt_value,
        observed_index=observed_index,
    )
