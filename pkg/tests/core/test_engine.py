"""Unit tests for the streaming engine."""
import logging
from pathlib import Path

import numpy as np
import pytest

from app.core import engine
from app.core.basis import max_row_norm_sq, surrogate_value
from app.core.checkpoint import save_checkpoint
from app.core.coeff import sample_loss, solve_coeff_noise
from app.core.config import settings
from app.core.engine import (
    DESCENT_SLACK,
    complete_matrix,
    init_engine,
    reconstruct,
    run_stream,
    spectral_start,
    step,
)
from app.core.exceptions import DescentViolationError, DimensionMismatchError, NonFiniteInputError
from app.core.tasks.synthetic_generation import SyntheticData
from app.models.sample import SampleVector
from app.schemas.engine import CompletionMode, EngineConfig, StepReport


def test_init_engine(engine_config: EngineConfig):
    """Test the initial state is a seeded basis with zero accumulators."""
    state = init_engine(engine_config)
    assert state.L.shape == (12, 3)
    assert state.t == 0
    assert not state.A.any() and not state.B.any()
    assert state.loss_constant == 0.0
    np.testing.assert_array_equal(state.L, init_engine(engine_config).L)


def test_init_engine_depends_on_seed():
    """Test another seed gives another basis."""
    first = init_engine(EngineConfig(p=6, d=2, init_seed=1))
    second = init_engine(EngineConfig(p=6, d=2, init_seed=2))
    assert not np.array_equal(first.L, second.L)


def test_step_updates_accumulators(engine_config: EngineConfig, rng: np.random.Generator):
    """Test one step folds the sample into A, B and t."""
    state = init_engine(engine_config)
    state, report = step(state, rng.normal(size=12), engine_config)
    assert state.t == 1
    assert report.t == 1
    np.testing.assert_allclose(state.A, state.A.T)
    assert np.linalg.eigvalsh(state.A).min() >= -1e-12
    assert report.surrogate == pytest.approx(surrogate_value(state, engine_config.solver.lambda1))
    assert report.wall_nanos > 0


def test_step_without_timing(engine_config: EngineConfig, rng: np.random.Generator):
    """Test timing can be switched off for reproducible reports."""
    _, report = step(init_engine(engine_config), rng.normal(size=12), engine_config, record_timing=False)
    assert report.wall_nanos == 0


def test_step_dimension_mismatch(engine_config: EngineConfig):
    """Test a sample of the wrong length is rejected."""
    with pytest.raises(DimensionMismatchError):
        step(init_engine(engine_config), np.ones(11), engine_config)


def test_step_completion_needs_mask(rng: np.random.Generator):
    """Test completion mode refuses unmasked samples."""
    config = EngineConfig(p=6, d=2, mode=CompletionMode())
    with pytest.raises(ValueError):
        step(init_engine(config), rng.normal(size=6), config)


def test_basis_update_descends_on_every_step(engine_config: EngineConfig, synthetic_data: SyntheticData):
    """Test the basis sub-step never raises the surrogate."""
    reports: list[StepReport] = []
    run_stream(synthetic_data.columns(), engine_config, sink=reports.append)
    assert len(reports) == 60
    for report in reports:
        before = report.surrogate - report.basis_delta
        assert report.basis_delta <= DESCENT_SLACK * max(1.0, abs(before))


def test_run_stream_is_deterministic(engine_config: EngineConfig, synthetic_data: SyntheticData):
    """Test identical inputs give identical states."""
    first = run_stream(synthetic_data.columns(), engine_config)
    second = run_stream(synthetic_data.columns(), engine_config)
    assert first == second


def test_resume_matches_uninterrupted_run(engine_config: EngineConfig, synthetic_data: SyntheticData, tmp_path: Path):
    """Test a resumed run ends in the same state as an uninterrupted one."""
    samples = list(synthetic_data.columns())
    halfway = run_stream(samples[:25], engine_config)
    path = save_checkpoint(halfway, tmp_path / "state.omrx", engine_config.mode_tag)

    resumed = run_stream(samples, engine_config, resume_from=path)
    uninterrupted = run_stream(samples, engine_config)
    assert resumed == uninterrupted


def test_run_stream_checkpoints(engine_config: EngineConfig, synthetic_data: SyntheticData, tmp_path: Path):
    """Test periodic checkpoints are written."""
    config = engine_config.model_copy(update={"checkpoint_every": 20})
    path = tmp_path / "state.omrx"
    run_stream(synthetic_data.columns(), config, checkpoint_path=path)
    assert path.exists()


def test_run_stream_rejects_non_finite_input(engine_config: EngineConfig, rng: np.random.Generator):
    """Test a NaN sample is reported with its position."""
    samples = [rng.normal(size=12) for _ in range(5)]
    samples[2][4] = np.nan
    with pytest.raises(NonFiniteInputError) as exc_info:
        run_stream(samples, engine_config)
    assert exc_info.value.position == 3


def test_run_stream_ignores_unobserved_nan(rng: np.random.Generator):
    """Test unobserved coordinates may hold any value."""
    config = EngineConfig(p=6, d=2, mode=CompletionMode())
    values = rng.normal(size=6)
    values[0] = np.nan
    mask = np.array([False, True, True, True, True, True])
    state = run_stream([SampleVector(values=values, mask=mask)], config)
    assert state.t == 1
    assert np.isfinite(state.L).all()


def test_run_stream_evaluates(engine_config: EngineConfig, synthetic_data: SyntheticData):
    """Test the evaluator output is attached at its cadence."""
    reports: list[StepReport] = []
    run_stream(synthetic_data.columns(), engine_config, sink=reports.append, evaluate=lambda L: 0.5, evaluate_every=20)
    assert [report.t for report in reports if report.ev is not None] == [20, 40, 60]


def test_reconstruct(engine_config: EngineConfig, synthetic_data: SyntheticData):
    """Test the estimate is L r at the current basis."""
    state = run_stream(synthetic_data.columns(), engine_config)
    sample = next(iter(synthetic_data.columns()))
    estimate, pair = reconstruct(state, sample, engine_config)
    np.testing.assert_allclose(estimate, state.L @ pair.r)


def test_complete_matrix_keeps_observed_entries(rng: np.random.Generator):
    """Test observed entries come back unchanged and the rest are finite."""
    Z = rng.normal(size=(8, 2)) @ rng.normal(size=(2, 20))
    mask = rng.random(Z.shape) < 0.6
    config = EngineConfig(p=8, d=2, mode=CompletionMode())
    completed, state = complete_matrix(Z, mask, config, passes=2)
    np.testing.assert_array_equal(completed[mask], Z[mask])
    assert np.isfinite(completed).all()
    assert state.t == 40


def test_complete_matrix_needs_completion_mode(engine_config: EngineConfig):
    """Test decomposition configs are rejected."""
    with pytest.raises(ValueError):
        complete_matrix(np.zeros((12, 3)), np.ones((12, 3), dtype=bool), engine_config)


def test_first_step_accumulators_are_exact(engine_config: EngineConfig, rng: np.random.Generator):
    """Test A_1 = r r^T, B_1 = (z - e) r^T and g_1 = loss + lambda1/2 ||L_1||_{2,inf}^2."""
    z = rng.normal(size=12)
    initial = init_engine(engine_config)
    spec = engine_config.regularizer()
    pair = solve_coeff_noise(initial.L, z, spec, engine_config.solver)

    state, report = step(init_engine(engine_config), z, engine_config)
    np.testing.assert_array_equal(state.A, np.outer(pair.r, pair.r))
    np.testing.assert_array_equal(state.B, np.outer(z - pair.e, pair.r))
    lambda1 = engine_config.solver.lambda1
    expected = sample_loss(z, state.L, pair.r, pair.e, spec) + 0.5 * lambda1 * max_row_norm_sq(state.L)
    assert report.surrogate == pytest.approx(expected, rel=1e-9)


def test_step_rejects_a_basis_update_that_ascends(
    engine_config: EngineConfig, rng: np.random.Generator, monkeypatch: pytest.MonkeyPatch
):
    """Test a basis update that raises the surrogate stops the run."""

    def ascend(state, config):
        state.L[...] = 1e3
        return state

    monkeypatch.setattr(engine, "update_basis", ascend)
    with pytest.raises(DescentViolationError):
        step(init_engine(engine_config), rng.normal(size=12), engine_config)


def test_run_stream_logs_progress_at_its_cadence(
    engine_config: EngineConfig, synthetic_data: SyntheticData, caplog: pytest.LogCaptureFixture
):
    """Test progress lines follow progress_every and are off by default."""
    with caplog.at_level(logging.INFO, logger="app.core.engine"):
        run_stream(synthetic_data.columns(), engine_config, progress_every=20)
    assert [record.getMessage().split()[1] for record in caplog.records if "Processed" in record.getMessage()] == [
        "20", "40", "60",
    ]

    caplog.clear()
    with caplog.at_level(logging.INFO, logger="app.core.engine"):
        run_stream(synthetic_data.columns(), engine_config)
    assert "Processed" not in caplog.text


def test_spectral_start_scales_the_leading_subspace(rng: np.random.Generator):
    """Test the completion start spans the top singular vectors with the headroom length."""
    X = rng.normal(size=(10, 2)) @ rng.normal(size=(2, 30))
    mask = np.ones(X.shape, dtype=bool)
    config = EngineConfig(p=10, d=2, mode=CompletionMode())
    state = spectral_start(X, mask, config)

    lengths = np.linalg.norm(state.L, axis=0)
    np.testing.assert_allclose(lengths, settings.COMPLETION_HEADROOM * np.linalg.norm(X, axis=0).max())
    U, _, _ = np.linalg.svd(X, full_matrices=False)
    np.testing.assert_allclose(state.L @ np.linalg.pinv(state.L) @ U[:, :2], U[:, :2], atol=1e-10)
    assert state.t == 0 and not state.A.any() and not state.B.any()


def test_spectral_start_without_observations(engine_config: EngineConfig):
    """Test an empty mask falls back to the seeded Gaussian basis."""
    config = EngineConfig(p=12, d=3, mode=CompletionMode(), init_seed=7)
    state = spectral_start(np.zeros((12, 4)), np.zeros((12, 4), dtype=bool), config)
    np.testing.assert_array_equal(state.L, init_engine(config).L)
