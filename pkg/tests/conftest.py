"""Pytest configuration and fixtures."""
from pathlib import Path

import numpy as np
import pytest

from app.core.tasks.synthetic_generation import SyntheticData, generate
from app.schemas.bench import SyntheticSpec
from app.schemas.engine import EngineConfig
from app.schemas.solver import SolverConfig


@pytest.fixture(scope="function")
def rng() -> np.random.Generator:
    """Seeded generator, fresh for each test."""
    return np.random.default_rng(20240611)


@pytest.fixture(scope="function")
def solver_config() -> SolverConfig:
    """Solver settings with explicit penalty weights."""
    return SolverConfig(lambda1=0.1, lambda2=0.1)


@pytest.fixture(scope="function")
def small_basis(rng: np.random.Generator) -> np.ndarray:
    """Full-rank 8 x 4 basis."""
    return rng.standard_normal((8, 4))


@pytest.fixture(scope="function")
def engine_config() -> EngineConfig:
    """Small l1 decomposition config with default penalties."""
    return EngineConfig(p=12, d=3, init_seed=7)


@pytest.fixture(scope="function")
def synthetic_data() -> SyntheticData:
    """Short corrupted stream matching ``engine_config``."""
    return generate(SyntheticSpec(p=12, n=60, d_true=3, rho=0.05, seed=11))


@pytest.fixture(scope="function")
def out_dir(tmp_path: Path) -> Path:
    """Output directory that does not exist yet."""
    return tmp_path / "out"
