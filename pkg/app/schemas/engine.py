"""Engine configuration and per-step report schemas."""
import math
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Self

from app.core.config import settings
from app.schemas.regularizer import RegularizerSpec
from app.schemas.solver import SolverConfig


class DecompositionMode(BaseModel):
    """Decomposition with an l1 or column-l2 noise penalty."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["decomposition"] = "decomposition"
    regularizer: Literal["l1", "l2"] = "l1"


class CompletionMode(BaseModel):
    """Completion through the masked l1 reformulation with weight ``c``."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["completion"] = "completion"
    c: float = Field(settings.COMPLETION_C, gt=0.0)


EngineMode = Annotated[DecompositionMode | CompletionMode, Field(discriminator="kind")]

# Checkpoint mode tags
MODE_TAGS = {"l1": 0, "l2": 1, "completion": 2}


class EngineConfig(BaseModel):
    """Everything a stream run needs besides the samples themselves."""
    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=1)
    d: int = Field(ge=1)
    mode: EngineMode = DecompositionMode()
    solver: SolverConfig = SolverConfig()
    init_seed: int = 0
    checkpoint_every: int = Field(0, ge=0)  # 0 = never

    @model_validator(mode="after")
    def resolve_lambdas(self) -> Self:
        if self.d > self.p:
            raise ValueError(f"d ({self.d}) must not exceed p ({self.p}) for the default initializer")
        if self.solver.lambda1 is None or self.solver.lambda2 is None:
            object.__setattr__(self, "solver", self.solver.with_default_lambdas(self.p))
        return self

    @property
    def is_completion(self) -> bool:
        return isinstance(self.mode, CompletionMode)

    @property
    def mode_tag(self) -> int:
        if isinstance(self.mode, CompletionMode):
            return MODE_TAGS["completion"]
        return MODE_TAGS[self.mode.regularizer]

    def regularizer(self) -> RegularizerSpec:
        """Noise penalty of decomposition mode; completion builds one per sample."""
        if isinstance(self.mode, CompletionMode):
            raise ValueError("completion mode builds a masked regularizer per sample")
        return RegularizerSpec(kind=self.mode.regularizer, lambda2=self.solver.require_lambda2())


class StepReport(BaseModel):
    """Scalar summary of one streamed sample."""
    model_config = ConfigDict(frozen=True)

    t: int = Field(ge=1)
    eta: float = Field(ge=0.0)
    coeff_iters: int = Field(ge=0)
    kkt_residual: float = Field(ge=0.0)
    stalled: bool = False
    surrogate: float
    basis_delta: float = 0.0  # g_t after the basis update minus g_t before it
    wall_nanos: int = Field(0, ge=0)
    ev: float | None = None

    @field_validator("surrogate")
    @classmethod
    def validate_surrogate(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("surrogate must be finite")
        return v
