"""Unit tests for solver and engine schemas."""
import math

import pytest
from pydantic import ValidationError

from app.schemas.engine import CompletionMode, DecompositionMode, EngineConfig, StepReport
from app.schemas.solver import SolverConfig


def test_solver_config_defaults():
    """Test solver defaults come from settings."""
    config = SolverConfig()
    assert config.epsilon_jitter == 0.01
    assert config.bcd_max_iters == 100
    assert config.lambda1 is None


def test_solver_config_rejects_non_positive_lambda():
    """Test penalties must be positive."""
    with pytest.raises(ValidationError):
        SolverConfig(lambda1=0.0)


def test_require_lambda_unresolved():
    """Test unresolved penalties cannot be read."""
    with pytest.raises(ValueError):
        SolverConfig().require_lambda1()


def test_engine_config_resolves_default_lambdas():
    """Test penalties default to 1/sqrt(p)."""
    config = EngineConfig(p=400, d=40)
    assert config.solver.lambda1 == pytest.approx(0.05)
    assert config.solver.lambda2 == pytest.approx(0.05)


def test_engine_config_keeps_explicit_lambdas():
    """Test explicit penalties are not overwritten."""
    config = EngineConfig(p=100, d=5, solver=SolverConfig(lambda1=0.3))
    assert config.solver.lambda1 == 0.3
    assert config.solver.lambda2 == pytest.approx(0.1)


def test_engine_config_rank_above_dimension():
    """Test d > p is rejected."""
    with pytest.raises(ValidationError):
        EngineConfig(p=3, d=4)


def test_engine_config_mode_from_dict():
    """Test the mode union is discriminated by kind."""
    config = EngineConfig.model_validate({"p": 5, "d": 2, "mode": {"kind": "completion", "c": 50.0}})
    assert isinstance(config.mode, CompletionMode)
    assert config.is_completion
    assert config.mode_tag == 2


def test_engine_config_round_trip():
    """Test a dumped config validates back to an equal one."""
    config = EngineConfig(p=6, d=2, mode=DecompositionMode(regularizer="l2"), init_seed=3)
    assert EngineConfig.model_validate(config.model_dump()) == config


def test_regularizer_of_decomposition_mode():
    """Test decomposition configs build their noise penalty."""
    spec = EngineConfig(p=4, d=1, mode=DecompositionMode(regularizer="l2")).regularizer()
    assert spec.kind == "l2"
    assert spec.lambda2 == pytest.approx(0.5)


def test_regularizer_of_completion_mode():
    """Test completion configs have no fixed penalty."""
    with pytest.raises(ValueError):
        EngineConfig(p=4, d=1, mode=CompletionMode()).regularizer()


def test_completion_c_must_be_positive():
    """Test c > 0."""
    with pytest.raises(ValidationError):
        CompletionMode(c=0.0)


def test_step_report_rejects_non_finite_surrogate():
    """Test a NaN surrogate cannot be reported."""
    with pytest.raises(ValidationError):
        StepReport(t=1, eta=0.0, coeff_iters=1, kkt_residual=0.0, surrogate=math.nan)


def test_step_report_needs_positive_t():
    """Test reports start at t = 1."""
    with pytest.raises(ValidationError):
        StepReport(t=0, eta=0.0, coeff_iters=1, kkt_residual=0.0, surrogate=1.0)
