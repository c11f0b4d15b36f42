"""Solver configuration schema."""
from pydantic import BaseModel, ConfigDict, Field

from app.core.config import settings


class SolverConfig(BaseModel):
    """Tunable parameters of the per-sample and basis solvers.

    ``lambda1`` and ``lambda2`` may be left unset; ``EngineConfig`` resolves
    them to ``1/sqrt(p)``.
    """
    model_config = ConfigDict(frozen=True)

    lambda1: float | None = Field(None, gt=0.0)
    lambda2: float | None = Field(None, gt=0.0)
    epsilon_jitter: float = Field(settings.EPSILON_JITTER, ge=0.0)
    bcd_tol: float = Field(settings.BCD_TOL, gt=0.0)
    bcd_max_iters: int = Field(settings.BCD_MAX_ITERS, ge=1)
    bisection_tol: float = Field(settings.BISECTION_TOL, gt=0.0)
    bisection_max_iters: int = Field(settings.BISECTION_MAX_ITERS, ge=1)
    basis_burn_in: int = Field(settings.BASIS_BURN_IN, ge=0)
    basis_max_passes: int = Field(settings.BASIS_MAX_PASSES, ge=1)
    basis_pass_tol: float = Field(settings.BASIS_PASS_TOL, gt=0.0)

    def with_default_lambdas(self, p: int) -> "SolverConfig":
        """Return a copy with unset penalty weights replaced by ``1/sqrt(p)``."""
        default = 1.0 / float(p) ** 0.5
        return self.model_copy(
            update={
                "lambda1": default if self.lambda1 is None else self.lambda1,
                "lambda2": default if self.lambda2 is None else self.lambda2,
            }
        )

    def require_lambda1(self) -> float:
        if self.lambda1 is None:
            raise ValueError("lambda1 is unresolved; build the config through EngineConfig")
        return self.lambda1

    def require_lambda2(self) -> float:
        if self.lambda2 is None:
            raise ValueError("lambda2 is unresolved; build the config through EngineConfig")
        return self.lambda2
