"""Resolve command-line flags and an optional key=value file into a RunManifest.

Precedence is flag > config file > ``settings`` default.
"""
import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import UsageError
from app.core.ingest import sniff_dimension
from app.schemas.bench import SyntheticSpec
from app.schemas.engine import CompletionMode, DecompositionMode, EngineConfig
from app.schemas.manifest import Command, GridSpec, RunManifest
from app.schemas.solver import SolverConfig

logger = logging.getLogger(__name__)

RUN_KEYS = frozenset(
    {
        "mode", "p", "d", "lambda1", "lambda2", "epsilon", "c", "seed",
        "input", "synth", "grid", "sweep", "checkpoint_every", "resume", "out",
        "report_every", "reps", "workers", "passes", "record_timing",
    }
)
MODES = ("l1", "l2", "mc")
SWEEP_RHO = 0.3
DEFAULT_SWEEP_P = (400, 1000, 3000)


def _normalize_key(key: str) -> str:
    return key.strip().lower().lstrip("-").replace("-", "_")


def read_config_file(path: Path | str) -> dict[str, str]:
    """Read a flat key=value file; keys may use dashes or underscores."""
    if not Path(path).is_file():
        raise UsageError(f"config file {path} does not exist")
    values: dict[str, str] = {}
    for key, value in dotenv_values(path).items():
        name = _normalize_key(key)
        if name not in RUN_KEYS:
            raise UsageError(f"unknown key {key!r} in {path}")
        if value is not None and value != "":
            values[name] = value
    return values


def _merge(flags: Mapping[str, Any], config_file: Path | str | None) -> dict[str, Any]:
    merged: dict[str, Any] = dict(read_config_file(config_file)) if config_file is not None else {}
    for key, value in flags.items():
        name = _normalize_key(key)
        if name not in RUN_KEYS:
            raise UsageError(f"unknown flag --{name.replace('_', '-')}")
        if value is not None:
            merged[name] = value
    return merged


def _default_synth(command: Command, seed: int) -> SyntheticSpec:
    p = settings.DEFAULT_P
    rho = SWEEP_RHO if command == "sweep" else settings.DEFAULT_RHO
    return SyntheticSpec(p=p, n=settings.DEFAULT_N, d_true=max(1, round(settings.DEFAULT_D_RATIO * p)), rho=rho, seed=seed)


def _resolve_source(command: Command, merged: dict[str, Any], seed: int) -> tuple[Path | None, SyntheticSpec | None]:
    if merged.get("input") is not None and merged.get("synth") is not None:
        raise UsageError("--input and --synth are mutually exclusive")
    if merged.get("input") is not None:
        if command in ("synth-bench", "grid", "sweep"):
            raise UsageError(f"{command} runs on synthetic data; --input is not accepted")
        path = Path(merged["input"])
        if not path.is_file():
            raise UsageError(f"input file {path} does not exist")
        return path, None
    if merged.get("synth") is not None:
        synth = SyntheticSpec.from_flag(str(merged["synth"]), seed=seed)
        if command == "complete":
            synth = SyntheticSpec(**{**synth.model_dump(), "observed_fraction": settings.OBSERVED_FRACTION})
        return None, synth
    if command in ("decompose", "complete"):
        raise UsageError(f"{command} needs --input or --synth")
    return None, _default_synth(command, seed)


def _resolve_mode(command: Command, merged: dict[str, Any]) -> DecompositionMode | CompletionMode:
    mode = str(merged.get("mode", "mc" if command == "complete" else "l1")).lower()
    if mode not in MODES:
        raise UsageError(f"--mode must be one of {', '.join(MODES)}, got {mode!r}")
    if mode == "mc":
        return CompletionMode(c=float(merged.get("c", settings.COMPLETION_C)))
    if "c" in merged:
        raise UsageError("--c only applies to --mode mc")
    return DecompositionMode(regularizer=mode)


def _resolve_grid(command: Command, merged: dict[str, Any], p: int) -> GridSpec | None:
    if command != "grid":
        for key in ("grid", "reps", "workers"):
            if key in merged:
                raise UsageError(f"--{key} only applies to the grid command")
        return None
    if "grid" in merged:
        grid = GridSpec.from_flag(str(merged["grid"]))
        if "reps" in merged:
            grid = GridSpec(d_values=grid.d_values, rho_values=grid.rho_values, reps=int(merged["reps"]))
        return grid
    return GridSpec.robustness_protocol(p, reps=int(merged.get("reps", settings.GRID_REPS)))


def _resolve_sweep(command: Command, merged: dict[str, Any]) -> list[int] | None:
    if command != "sweep":
        if "sweep" in merged:
            raise UsageError("--sweep only applies to the sweep command")
        return None
    value = merged.get("sweep")
    if value is None:
        return list(DEFAULT_SWEEP_P)
    return [int(part) for part in str(value).split(",") if part.strip()]


def parse_config(command: Command, flags: Mapping[str, Any], config_file: Path | str | None = None) -> RunManifest:
    """Build the manifest for ``command``.

    Raises:
        UsageError: On unknown keys, conflicting inputs, or values the schemas reject.
    """
    merged = _merge(flags, config_file)
    try:
        if merged.get("resume") is not None and int(merged.get("passes", 1)) > 1:
            raise UsageError("--resume cannot be combined with --passes > 1")
        seed = int(merged.get("seed", 0))
        input_path, synth = _resolve_source(command, merged, seed)

        if synth is not None:
            p = synth.p
            if "p" in merged and int(merged["p"]) != p:
                raise UsageError(f"--p {merged['p']} conflicts with the synthetic dimension {p}")
            default_d = synth.d_true
        else:
            p = int(merged["p"]) if "p" in merged else sniff_dimension(input_path)
            default_d = max(1, round(settings.DEFAULT_D_RATIO * p))

        solver_fields: dict[str, Any] = {}
        for key in ("lambda1", "lambda2"):
            if key in merged:
                solver_fields[key] = float(merged[key])
        if "epsilon" in merged:
            solver_fields["epsilon_jitter"] = float(merged["epsilon"])

        config = EngineConfig(
            p=p,
            d=int(merged.get("d", default_d)),
            mode=_resolve_mode(command, merged),
            solver=SolverConfig(**solver_fields),
            init_seed=seed,
            checkpoint_every=int(merged.get("checkpoint_every", 0)),
        )
        manifest = RunManifest(
            command=command,
            config=config,
            input_path=input_path,
            synth=synth,
            grid=_resolve_grid(command, merged, p),
            sweep_p=_resolve_sweep(command, merged),
            output_dir=Path(merged.get("out", "out")),
            report_every=int(merged.get("report_every", settings.REPORT_EVERY)),
            resume=Path(merged["resume"]) if merged.get("resume") is not None else None,
            passes=int(merged.get("passes", 1)),
            workers=int(merged.get("workers", settings.GRID_WORKERS)),
            record_timing=merged.get("record_timing", settings.RECORD_TIMING),
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        raise UsageError(f"invalid {location}: {first['msg']}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    logger.debug("Resolved %s manifest %s", command, manifest.fingerprint()[:16])
    return manifest
