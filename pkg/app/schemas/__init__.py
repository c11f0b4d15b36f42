"""Pydantic schemas for configuration and reports."""
from app.schemas.bench import EvReport, SyntheticSpec
from app.schemas.engine import CompletionMode, DecompositionMode, EngineConfig, StepReport
from app.schemas.manifest import GridSpec, RunManifest, RunSummary
from app.schemas.regularizer import RegularizerSpec
from app.schemas.solver import SolverConfig

__all__ = [
    "CompletionMode",
    "DecompositionMode",
    "EngineConfig",
    "EvReport",
    "GridSpec",
    "RegularizerSpec",
    "RunManifest",
    "RunSummary",
    "SolverConfig",
    "StepReport",
    "SyntheticSpec",
]
