"""Synthetic benchmark schemas."""
import hashlib

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Self

from app.core.config import settings


class SyntheticSpec(BaseModel):
    """Low-rank-plus-sparse data model: Z = U V^T + E."""
    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=1)  # ambient dimension
    n: int = Field(ge=0)  # number of samples
    d_true: int = Field(ge=1)  # intrinsic dimension
    rho: float = Field(0.0, ge=0.0, le=1.0)  # corruption fraction
    corruption_range: tuple[float, float] = (settings.CORRUPTION_LOW, settings.CORRUPTION_HIGH)
    observed_fraction: float | None = Field(None, gt=0.0, le=1.0)  # completion masks only
    seed: int = 0

    @field_validator("corruption_range")
    @classmethod
    def validate_corruption_range(cls, v: tuple[float, float]) -> tuple[float, float]:
        lo, hi = v
        if not lo < hi:
            raise ValueError("corruption_range must satisfy lo < hi")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self) -> Self:
        if self.d_true > self.p:
            raise ValueError(f"d_true ({self.d_true}) must not exceed p ({self.p})")
        return self

    @classmethod
    def from_flag(cls, value: str, seed: int = 0) -> "SyntheticSpec":
        """Parse the ``"p,n,d,rho"`` command-line form."""
        parts = [part.strip() for part in value.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected 'p,n,d,rho', got {value!r}")
        p, n, d = (int(part) for part in parts[:3])
        return cls(p=p, n=n, d_true=d, rho=float(parts[3]), seed=seed)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()[:16]


class EvReport(BaseModel):
    """Expressed variance of a learned basis after ``t`` samples."""
    model_config = ConfigDict(frozen=True)

    ev: float = Field(ge=0.0, le=1.0 + 1e-12)
    t: int = Field(ge=0)
    spec: str  # SyntheticSpec fingerprint
