"""Noise regularizer schema."""
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Self

RegularizerKind = Literal["l1", "l2", "masked_l1"]


class RegularizerSpec(BaseModel):
    """Which column penalty on the noise is active.

    ``l1`` is the entrywise penalty of robust PCA, ``l2`` the column norm of
    outlier pursuit, and ``masked_l1`` the weighted penalty that turns
    completion into a decomposition: weight ``c`` on observed entries and
    ``1/c`` elsewhere. ``lambda2`` is not used by ``masked_l1``.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: RegularizerKind = "l1"
    lambda2: float = Field(1.0, ge=0.0)
    mask_weight_c: float | None = None
    mask: np.ndarray | None = None

    @field_validator("mask", mode="before")
    @classmethod
    def validate_mask(cls, v: object) -> np.ndarray | None:
        """Coerce the mask to a one-dimensional boolean array."""
        if v is None:
            return None
        mask = np.asarray(v)
        if mask.ndim != 1:
            raise ValueError("mask must be one-dimensional")
        if mask.dtype != bool:
            if not np.isin(mask, (0, 1)).all():
                raise ValueError("mask entries must be boolean")
            mask = mask.astype(bool)
        return mask

    @model_validator(mode="after")
    def validate_masked_fields(self) -> Self:
        if self.kind == "masked_l1":
            if self.mask is None:
                raise ValueError("masked_l1 requires a mask")
            if self.mask_weight_c is None or self.mask_weight_c <= 0:
                raise ValueError("masked_l1 requires mask_weight_c > 0")
        elif self.mask is not None or self.mask_weight_c is not None:
            raise ValueError(f"mask and mask_weight_c are only valid for masked_l1, not {self.kind}")
        return self

    @classmethod
    def masked(cls, mask: np.ndarray, c: float) -> "RegularizerSpec":
        return cls(kind="masked_l1", mask=mask, mask_weight_c=c)

    def weights(self) -> np.ndarray:
        """Per-coordinate l1 weights of ``masked_l1``: c observed, 1/c unobserved."""
        if self.kind != "masked_l1":
            raise ValueError("weights are only defined for masked_l1")
        c = float(self.mask_weight_c)
        return np.where(self.mask, c, 1.0 / c)
