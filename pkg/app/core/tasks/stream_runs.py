"""Single-stream runs behind the decompose, complete and synth-bench commands."""
import logging
from collections.abc import Iterable
from functools import partial

import numpy as np

from app.core.basis import surrogate_value
from app.core.checkpoint import save_checkpoint
from app.core.config import settings
from app.core.engine import Evaluator, complete_matrix, run_stream
from app.core.ingest import ingest_stream, read_matrix
from app.core.metrics import expressed_variance
from app.core.reporting import MetricsWriter, write_matrix
from app.core.tasks.synthetic_generation import SyntheticData, generate
from app.models.basis import BasisState
from app.models.sample import SampleVector
from app.schemas.manifest import RunManifest, RunSummary

logger = logging.getLogger(__name__)


def _source(manifest: RunManifest, data: SyntheticData | None) -> Iterable[SampleVector]:
    if data is not None:
        return data.columns()
    return ingest_stream(manifest.input_path, completion=manifest.config.is_completion, p=manifest.config.p)


def _complete_in_memory(manifest: RunManifest, data: SyntheticData | None, metrics: MetricsWriter) -> BasisState:
    config = manifest.config
    if data is not None:
        samples = list(data.columns())
        Z = np.column_stack([sample.observed_values() for sample in samples])
        mask = np.column_stack([sample.mask for sample in samples])
    else:
        Z, mask = read_matrix(manifest.input_path, completion=True)
    completed, state = complete_matrix(Z, mask, config, passes=manifest.passes, seed=config.init_seed, sink=metrics)
    write_matrix(manifest.output_dir / "completed.csv", completed, manifest.fingerprint())
    if data is not None:
        truth = data.low_rank()
        hidden = ~mask
        if hidden.any():
            error = np.linalg.norm((completed - truth)[hidden]) / max(np.linalg.norm(truth[hidden]), 1e-300)
            logger.info("Relative error on unobserved entries: %.4g", error)
    return state


def run_single(manifest: RunManifest) -> RunSummary:
    """Stream the manifest's input once (or ``passes`` times for completion) and write its outputs.

    Writes ``metrics.csv``, ``basis.csv`` and the final checkpoint into the
    output directory, plus ``completed.csv`` for multi-pass completion.
    """
    config = manifest.config
    output_dir = manifest.output_dir
    output_dir.mkdir(parents=True, exist_ok=True)
    fingerprint = manifest.fingerprint()
    checkpoint_path = output_dir / settings.CHECKPOINT_NAME

    data = generate(manifest.synth) if manifest.synth is not None else None
    evaluate: Evaluator | None = partial(expressed_variance, data.U) if data is not None else None

    logger.info("Starting %s run with p=%d d=%d into %s", manifest.command, config.p, config.d, output_dir)
    with MetricsWriter(output_dir / "metrics.csv", fingerprint, every=manifest.report_every) as metrics:
        if manifest.command == "complete" and manifest.passes > 1:
            state = _complete_in_memory(manifest, data, metrics)
        else:
            state = run_stream(
                _source(manifest, data),
                config,
                sink=metrics,
                resume_from=manifest.resume,
                checkpoint_path=checkpoint_path,
                evaluate=evaluate,
                evaluate_every=manifest.report_every,
                record_timing=manifest.record_timing,
                progress_every=manifest.report_every,
            )
        metrics.close()

    save_checkpoint(state, checkpoint_path, config.mode_tag)
    write_matrix(output_dir / "basis.csv", state.L, fingerprint)

    ev = expressed_variance(data.U, state.L) if data is not None else None
    surrogate = surrogate_value(state, config.solver.require_lambda1()) if state.t else None
    if ev is not None:
        logger.info("Final expressed variance %.6f after %d samples", ev, state.t)
    return RunSummary(
        command=manifest.command,
        t=state.t,
        surrogate=surrogate,
        ev=ev,
        fingerprint=fingerprint,
        output_dir=output_dir,
    )
