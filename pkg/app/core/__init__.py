"""Core solver components."""
from app.core.config import settings
from app.core.engine import complete_matrix, init_engine, reconstruct, resume, run_stream, spectral_start, step

__all__ = ["settings", "init_engine", "step", "run_stream", "resume", "reconstruct", "spectral_start", "complete_matrix"]
