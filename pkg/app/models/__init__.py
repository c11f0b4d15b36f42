"""Numeric state models."""
from app.models.basis import BasisState
from app.models.coeff import CoeffNoisePair
from app.models.sample import SampleVector

__all__ = ["BasisState", "CoeffNoisePair", "SampleVector"]
