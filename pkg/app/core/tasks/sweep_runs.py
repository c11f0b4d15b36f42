"""Ambient-dimension sweep: EV against samples for several p at d = 0.1p."""
import logging
from functools import partial

from app.core.config import settings
from app.core.engine import run_stream
from app.core.metrics import expressed_variance
from app.core.reporting import write_csv
from app.core.tasks.synthetic_generation import generate
from app.schemas.bench import EvReport, SyntheticSpec
from app.schemas.engine import EngineConfig, StepReport
from app.schemas.manifest import RunManifest, RunSummary

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["p", "t", "ev"]


def run_dimension_sweep(
    p_values: list[int],
    template: EngineConfig,
    *,
    n: int = settings.DEFAULT_N,
    rho: float = 0.3,
    d_ratio: float = settings.DEFAULT_D_RATIO,
    seed: int = 0,
    report_every: int = settings.REPORT_EVERY,
) -> dict[int, list[EvReport]]:
    """EV curves for each ambient dimension.

    Each p gets rank ``round(d_ratio * p)`` for both data and solver and
    penalties ``1/sqrt(p)``; the mode and remaining solver settings come
    from ``template``.
    """
    curves: dict[int, list[EvReport]] = {}
    for p in p_values:
        d = max(1, round(d_ratio * p))
        spec = SyntheticSpec(p=p, n=n, d_true=d, rho=rho, seed=seed)
        config = EngineConfig(
            p=p,
            d=d,
            mode=template.mode,
            solver=template.solver.model_copy(update={"lambda1": None, "lambda2": None}),
            init_seed=template.init_seed,
        )
        data = generate(spec)
        curve: list[EvReport] = []

        def collect(report: StepReport, curve: list[EvReport] = curve, tag: str = spec.fingerprint()) -> None:
            if report.ev is not None:
                curve.append(EvReport(ev=report.ev, t=report.t, spec=tag))

        state = run_stream(
            data.columns(),
            config,
            sink=collect,
            evaluate=partial(expressed_variance, data.U),
            evaluate_every=report_every,
            record_timing=False,
            progress_every=report_every,
        )
        if state.t and (not curve or curve[-1].t != state.t):
            curve.append(EvReport(ev=expressed_variance(data.U, state.L), t=state.t, spec=spec.fingerprint()))
        logger.info("Sweep p=%d finished with EV %.4f", p, curve[-1].ev if curve else float("nan"))
        curves[p] = curve
    return curves


def run_sweep(manifest: RunManifest) -> RunSummary:
    """Run the sweep described by ``manifest`` and write ``sweep.csv``."""
    synth = manifest.synth
    curves = run_dimension_sweep(
        manifest.sweep_p,
        manifest.config,
        n=synth.n,
        rho=synth.rho,
        seed=synth.seed,
        report_every=manifest.report_every,
    )
    fingerprint = manifest.fingerprint()
    rows = [(p, report.t, report.ev) for p, curve in curves.items() for report in curve]
    write_csv(manifest.output_dir / "sweep.csv", SWEEP_COLUMNS, rows, fingerprint)
    finals = [curve[-1].ev for curve in curves.values() if curve]
    return RunSummary(
        command=manifest.command,
        t=synth.n * len(curves),
        ev=min(finals) if finals else None,
        fingerprint=fingerprint,
        output_dir=manifest.output_dir,
    )
