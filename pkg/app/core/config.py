from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="OMR_",
        env_ignore_empty=True,
        extra="ignore",
    )
    PROJECT_NAME: str = "maxnorm-stream"

    # Logging Configuration
    LOG_LEVEL: str = "INFO"

    # Coefficient/noise solver
    EPSILON_JITTER: float = 0.01
    BCD_TOL: float = 1e-6
    BCD_MAX_ITERS: int = 100
    BISECTION_TOL: float = 1e-8
    BISECTION_MAX_ITERS: int = 200

    # Basis update
    BASIS_BURN_IN: int = 100  # samples during which several passes are allowed
    BASIS_MAX_PASSES: int = 5
    BASIS_PASS_TOL: float = 1e-6

    # Completion mode weight on observed entries
    COMPLETION_C: float = 1e3
    COMPLETION_HEADROOM: float = 2.0  # spectral start: basis column length over the largest column norm

    # Synthetic protocol defaults
    DEFAULT_P: int = 400
    DEFAULT_N: int = 5000
    DEFAULT_D_RATIO: float = 0.1
    DEFAULT_RHO: float = 0.1
    CORRUPTION_LOW: float = -1000.0
    CORRUPTION_HIGH: float = 1000.0
    GRID_REPS: int = 10
    OBSERVED_FRACTION: float = 0.5  # synthetic completion runs

    # Reporting and execution
    REPORT_EVERY: int = 50
    RECORD_TIMING: bool = True
    GRID_WORKERS: int = 1
    CHECKPOINT_NAME: str = "state.omrx"

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        allowed = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        if v.upper() not in allowed:
            raise ValueError(f"Invalid log level: {v}. Must be one of: {', '.join(sorted(allowed))}")
        return v.upper()


settings = Settings()  # type: ignore
