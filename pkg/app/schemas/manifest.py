"""Run manifest schemas for the command-line front end."""
import hashlib
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Self

from app.core.config import settings
from app.schemas.bench import SyntheticSpec
from app.schemas.engine import EngineConfig

Command = Literal["decompose", "complete", "synth-bench", "grid", "sweep"]


class GridSpec(BaseModel):
    """Axes of a rank x corruption grid and the repetitions per cell."""
    model_config = ConfigDict(frozen=True)

    d_values: list[int] = Field(min_length=1)
    rho_values: list[float] = Field(min_length=1)
    reps: int = Field(settings.GRID_REPS, ge=1)

    @field_validator("d_values")
    @classmethod
    def validate_d_values(cls, v: list[int]) -> list[int]:
        if any(d < 1 for d in v):
            raise ValueError("grid ranks must be positive")
        return v

    @field_validator("rho_values")
    @classmethod
    def validate_rho_values(cls, v: list[float]) -> list[float]:
        if any(not 0.0 <= rho <= 1.0 for rho in v):
            raise ValueError("grid corruption fractions must lie in [0, 1]")
        return v

    @classmethod
    def from_flag(cls, value: str) -> "GridSpec":
        """Parse ``"d1,d2,...;rho1,rho2,...;reps"``."""
        parts = value.split(";")
        if len(parts) != 3:
            raise ValueError(f"expected 'dlist;rholist;reps', got {value!r}")
        d_values = [int(x) for x in parts[0].split(",") if x.strip()]
        rho_values = [float(x) for x in parts[1].split(",") if x.strip()]
        return cls(d_values=d_values, rho_values=rho_values, reps=int(parts[2]))

    @classmethod
    def robustness_protocol(cls, p: int, reps: int = settings.GRID_REPS) -> "GridSpec":
        """Rank from 0.02p to 0.5p in steps of 0.04p, corruption 0.02 to 0.5 in steps of 0.04."""
        d_values = sorted({max(1, round(p * (0.02 + 0.04 * k))) for k in range(13)})
        rho_values = [round(0.02 + 0.04 * k, 2) for k in range(13)]
        return cls(d_values=d_values, rho_values=rho_values, reps=reps)


class RunManifest(BaseModel):
    """Fully resolved description of one command-line run."""
    model_config = ConfigDict(frozen=True)

    command: Command
    config: EngineConfig
    input_path: Path | None = None
    synth: SyntheticSpec | None = None
    grid: GridSpec | None = None
    sweep_p: list[int] | None = None
    output_dir: Path = Path("out")
    report_every: int = Field(settings.REPORT_EVERY, ge=1)
    resume: Path | None = None
    passes: int = Field(1, ge=1)
    workers: int = Field(settings.GRID_WORKERS, ge=1)
    record_timing: bool = settings.RECORD_TIMING

    @model_validator(mode="after")
    def validate_input_source(self) -> Self:
        if (self.input_path is None) == (self.synth is None):
            raise ValueError("exactly one of input_path and synth must be given")
        if self.command in ("grid", "sweep") and self.synth is None:
            raise ValueError(f"{self.command} runs on synthetic data only")
        if self.command == "grid" and self.grid is None:
            raise ValueError("grid requires grid axes")
        if self.command == "complete" and not self.config.is_completion:
            raise ValueError("complete requires completion mode")
        if self.command != "complete" and self.config.is_completion:
            raise ValueError(f"{self.command} does not support completion mode")
        return self

    def fingerprint(self) -> str:
        """Hash of the resolved configuration, written into every output CSV.

        The output directory is left out so that reruns elsewhere match.
        """
        payload = self.model_dump_json(exclude={"output_dir"})
        return hashlib.sha256(payload.encode()).hexdigest()


class RunSummary(BaseModel):
    """What a finished run reports back to the command line."""
    model_config = ConfigDict(frozen=True)

    command: Command
    t: int = Field(ge=0)
    surrogate: float | None = None
    ev: float | None = None
    fingerprint: str
    output_dir: Path
