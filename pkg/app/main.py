import logging
from pathlib import Path
from typing import Annotated, Any, Callable, Optional

import typer

from app.core.config import settings
from app.core.exceptions import SolverError
from app.core.manifest import parse_config
from app.core.tasks.grid_runs import run_grid
from app.core.tasks.stream_runs import run_single
from app.core.tasks.sweep_runs import run_sweep
from app.schemas.manifest import Command, RunManifest, RunSummary

logger = logging.getLogger(__name__)

app = typer.Typer(
    name=settings.PROJECT_NAME,
    help="Online max-norm regularized matrix decomposition and completion.",
    no_args_is_help=True,
    add_completion=False,
)

RUNNERS: dict[Command, Callable[[RunManifest], RunSummary]] = {
    "decompose": run_single,
    "complete": run_single,
    "synth-bench": run_single,
    "grid": run_grid,
    "sweep": run_sweep,
}

ModeOpt = Annotated[Optional[str], typer.Option("--mode", help="Noise model: l1, l2 or mc.")]
POpt = Annotated[Optional[int], typer.Option("--p", help="Ambient dimension (inferred from the input when omitted).")]
DOpt = Annotated[Optional[int], typer.Option("--d", help="Rank of the learned basis.")]
Lambda1Opt = Annotated[Optional[float], typer.Option("--lambda1", help="Max-norm weight (default 1/sqrt(p)).")]
Lambda2Opt = Annotated[Optional[float], typer.Option("--lambda2", help="Noise weight (default 1/sqrt(p)).")]
EpsilonOpt = Annotated[Optional[float], typer.Option("--epsilon", help="Ridge jitter of the coefficient solver.")]
COpt = Annotated[Optional[float], typer.Option("--c", help="Observed-entry weight in completion mode.")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", help="Master seed for data and initialization.")]
InputOpt = Annotated[Optional[Path], typer.Option("--input", help="CSV file with one sample per line.")]
SynthOpt = Annotated[Optional[str], typer.Option("--synth", help="Synthetic data as 'p,n,d,rho'.")]
GridOpt = Annotated[Optional[str], typer.Option("--grid", help="Grid axes as 'dlist;rholist;reps'.")]
RepsOpt = Annotated[Optional[int], typer.Option("--reps", help="Repetitions per grid cell.")]
WorkersOpt = Annotated[Optional[int], typer.Option("--workers", help="Worker processes for grid cells.")]
SweepOpt = Annotated[Optional[str], typer.Option("--sweep", help="Comma-separated ambient dimensions.")]
PassesOpt = Annotated[Optional[int], typer.Option("--passes", help="Shuffled passes over an in-memory completion input.")]
CheckpointEveryOpt = Annotated[Optional[int], typer.Option("--checkpoint-every", help="Checkpoint cadence in samples.")]
ResumeOpt = Annotated[Optional[Path], typer.Option("--resume", help="Checkpoint to resume from.")]
OutOpt = Annotated[Optional[Path], typer.Option("--out", help="Output directory.")]
ConfigOpt = Annotated[Optional[Path], typer.Option("--config", help="Flat key=value run configuration file.")]
ReportEveryOpt = Annotated[Optional[int], typer.Option("--report-every", help="Metrics and EV cadence in samples.")]
NoTimingOpt = Annotated[bool, typer.Option("--no-timing", help="Write zero wall times for byte-identical reruns.")]


def _run(command: Command, params: dict[str, Any]) -> None:
    flags = dict(params)
    config_file = flags.pop("config", None)
    if "input_file" in flags:
        flags["input"] = flags.pop("input_file")
    flags["record_timing"] = False if flags.pop("no_timing", False) else None
    try:
        manifest = parse_config(command, flags, config_file)
        summary = RUNNERS[command](manifest)
    except SolverError as exc:
        logger.debug("%s failed", command, exc_info=True)
        typer.echo(f"error: {exc.message}", err=True)
        raise typer.Exit(code=exc.exit_code) from None
    typer.echo(summary.model_dump_json())


@app.callback()
def main(
    log_level: Annotated[str, typer.Option("--log-level", help="Logging level.")] = settings.LOG_LEVEL,
) -> None:
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        force=True,
    )


@app.command("decompose")
def decompose(
    mode: ModeOpt = None,
    p: POpt = None,
    d: DOpt = None,
    lambda1: Lambda1Opt = None,
    lambda2: Lambda2Opt = None,
    epsilon: EpsilonOpt = None,
    seed: SeedOpt = None,
    input_file: InputOpt = None,
    synth: SynthOpt = None,
    checkpoint_every: CheckpointEveryOpt = None,
    resume: ResumeOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
    report_every: ReportEveryOpt = None,
    no_timing: NoTimingOpt = False,
) -> None:
    """Stream samples through the l1 or l2 decomposition."""
    _run("decompose", locals())


@app.command("complete")
def complete(
    p: POpt = None,
    d: DOpt = None,
    lambda1: Lambda1Opt = None,
    lambda2: Lambda2Opt = None,
    epsilon: EpsilonOpt = None,
    c: COpt = None,
    seed: SeedOpt = None,
    input_file: InputOpt = None,
    synth: SynthOpt = None,
    passes: PassesOpt = None,
    checkpoint_every: CheckpointEveryOpt = None,
    resume: ResumeOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
    report_every: ReportEveryOpt = None,
    no_timing: NoTimingOpt = False,
) -> None:
    """Complete a partially observed stream; empty fields are unobserved."""
    _run("complete", locals())


@app.command("synth-bench")
def synth_bench(
    mode: ModeOpt = None,
    d: DOpt = None,
    lambda1: Lambda1Opt = None,
    lambda2: Lambda2Opt = None,
    epsilon: EpsilonOpt = None,
    seed: SeedOpt = None,
    synth: SynthOpt = None,
    checkpoint_every: CheckpointEveryOpt = None,
    resume: ResumeOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
    report_every: ReportEveryOpt = None,
    no_timing: NoTimingOpt = False,
) -> None:
    """Recover a synthetic subspace and record EV against the number of samples."""
    _run("synth-bench", locals())


@app.command("grid")
def grid(
    mode: ModeOpt = None,
    lambda1: Lambda1Opt = None,
    lambda2: Lambda2Opt = None,
    epsilon: EpsilonOpt = None,
    seed: SeedOpt = None,
    synth: SynthOpt = None,
    grid: GridOpt = None,
    reps: RepsOpt = None,
    workers: WorkersOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Average final EV over a rank x corruption grid."""
    _run("grid", locals())


@app.command("sweep")
def sweep(
    mode: ModeOpt = None,
    epsilon: EpsilonOpt = None,
    seed: SeedOpt = None,
    synth: SynthOpt = None,
    sweep: SweepOpt = None,
    out: OutOpt = None,
    config: ConfigOpt = None,
    report_every: ReportEveryOpt = None,
) -> None:
    """EV curves across ambient dimensions at rank 0.1p."""
    _run("sweep", locals())


if __name__ == "__main__":
    app()
