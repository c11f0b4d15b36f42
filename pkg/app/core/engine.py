"""Streaming decomposition and completion loops.

Each sample goes through three stages: solve its coefficients and noise
against the current basis, fold them into the accumulators, then update the
basis on the surrogate. Only the basis state survives between samples.
"""
import logging
import math
import time
from collections.abc import Callable, Iterable
from pathlib import Path

import numpy as np
import scipy.linalg

from app.core.basis import surrogate_value, update_basis
from app.core.checkpoint import load_checkpoint_with_mode, save_checkpoint
from app.core.coeff import DESCENT_SLACK, solve_coeff_noise
from app.core.config import settings
from app.core.exceptions import (
    DescentViolationError,
    DimensionMismatchError,
    NonFiniteInputError,
    NonFiniteStateError,
)
from app.core.prox import noise_penalty
from app.models.basis import BasisState
from app.models.coeff import CoeffNoisePair
from app.models.sample import SampleVector
from app.schemas.engine import EngineConfig, StepReport
from app.schemas.regularizer import RegularizerSpec

logger = logging.getLogger(__name__)

ReportSink = Callable[[StepReport], None]
Evaluator = Callable[[np.ndarray], float]


def init_engine(config: EngineConfig) -> BasisState:
    """Zero accumulators and a seeded Gaussian basis with entries of variance 1/d."""
    rng = np.random.default_rng(config.init_seed)
    L = rng.standard_normal((config.p, config.d)) / math.sqrt(config.d)
    return BasisState(
        L=L,
        A=np.zeros((config.d, config.d)),
        B=np.zeros((config.p, config.d)),
    )


def _as_sample(item: SampleVector | np.ndarray) -> SampleVector:
    if isinstance(item, SampleVector):
        return item
    return SampleVector(values=np.asarray(item, dtype=np.float64))


def _check_dimensions(state: BasisState, sample: SampleVector, config: EngineConfig) -> None:
    if state.L.shape != (config.p, config.d):
        raise DimensionMismatchError(
            f"basis has shape {state.L.shape}, config expects ({config.p}, {config.d})"
        )
    if sample.p != config.p:
        raise DimensionMismatchError(f"sample has length {sample.p}, expected {config.p}")


def regularizer_for(sample: SampleVector, config: EngineConfig) -> RegularizerSpec:
    """Noise penalty for one sample: configured in decomposition, masked in completion."""
    if config.is_completion:
        if sample.mask is None:
            raise ValueError("completion mode needs samples with an observation mask")
        return RegularizerSpec.masked(sample.mask, config.mode.c)
    return config.regularizer()


def step(
    state: BasisState,
    sample: SampleVector | np.ndarray,
    config: EngineConfig,
    *,
    record_timing: bool = True,
) -> tuple[BasisState, StepReport]:
    """Fold one sample into ``state`` (updated in place) and report on it.

    Raises:
        DimensionMismatchError: If the sample or the state disagree with the config.
        NonFiniteStateError: If the surrogate stops being finite.
        DescentViolationError: If the basis update raises g_t.
    """
    started = time.perf_counter_ns()
    sample = _as_sample(sample)
    _check_dimensions(state, sample, config)
    spec = regularizer_for(sample, config)
    z = sample.observed_values()

    pair = solve_coeff_noise(state.L, z, spec, config.solver)
    r, e = pair.r, pair.e
    residual = z - e
    state.A += np.outer(r, r)
    state.B += np.outer(residual, r)
    state.loss_constant += 0.5 * float(residual @ residual) + noise_penalty(e, spec)
    state.t += 1

    lambda1 = config.solver.require_lambda1()
    before = surrogate_value(state, lambda1)
    update_basis(state, config.solver)
    after = surrogate_value(state, lambda1)
    if not (math.isfinite(after) and np.isfinite(state.L).all()):
        raise NonFiniteStateError(f"surrogate became {after} at t={state.t}")

    delta = after - before
    if delta > DESCENT_SLACK * max(1.0, abs(before)):
        raise DescentViolationError(f"basis update raised the surrogate by {delta:.3e} at t={state.t}")

    report = StepReport(
        t=state.t,
        eta=pair.eta,
        coeff_iters=pair.iterations,
        kkt_residual=pair.kkt_residual,
        stalled=pair.stalled,
        surrogate=after,
        basis_delta=delta,
        wall_nanos=time.perf_counter_ns() - started if record_timing else 0,
    )
    return state, report


def resume(config: EngineConfig, path: Path | str) -> BasisState:
    """Load a checkpoint and make sure it belongs to ``config``."""
    state, mode_tag = load_checkpoint_with_mode(path)
    if (state.p, state.d) != (config.p, config.d):
        raise DimensionMismatchError(
            f"checkpoint holds (p, d) = ({state.p}, {state.d}), config expects ({config.p}, {config.d})"
        )
    if mode_tag != config.mode_tag:
        raise DimensionMismatchError(f"checkpoint mode tag {mode_tag} does not match config tag {config.mode_tag}")
    logger.info("Resumed from %s at t=%d", path, state.t)
    return state


def run_stream(
    source: Iterable[SampleVector | np.ndarray],
    config: EngineConfig,
    sink: ReportSink | None = None,
    *,
    resume_from: Path | str | None = None,
    checkpoint_path: Path | str | None = None,
    evaluate: Evaluator | None = None,
    evaluate_every: int = 0,
    record_timing: bool = True,
    progress_every: int = 0,
) -> BasisState:
    """Fold ``step`` over the stream and hand every report to ``sink``.

    When resuming, the first t samples of ``source`` are skipped so that the
    same source yields the same final state as an uninterrupted run. A
    checkpoint is written every ``config.checkpoint_every`` samples.
    ``evaluate`` receives a copy of L every ``evaluate_every`` samples and
    its value is attached to the report as ``ev``. Progress is logged every
    ``progress_every`` samples (never when 0).

    Raises:
        NonFiniteInputError: On the first sample with a NaN or infinite observed value.
    """
    state = resume(config, resume_from) if resume_from is not None else init_engine(config)
    already_seen = state.t

    for position, item in enumerate(source, start=1):
        if position <= already_seen:
            continue
        sample = _as_sample(item)
        observed = sample.observed_values()
        if not np.isfinite(observed).all():
            coordinate = int(np.flatnonzero(~np.isfinite(observed))[0])
            raise NonFiniteInputError(
                f"sample {position} has a non-finite value at coordinate {coordinate}",
                position=position,
            )

        state, report = step(state, sample, config, record_timing=record_timing)
        if evaluate is not None and evaluate_every and state.t % evaluate_every == 0:
            report = report.model_copy(update={"ev": evaluate(state.L.copy())})
        if sink is not None:
            sink(report)
        if checkpoint_path is not None and config.checkpoint_every and state.t % config.checkpoint_every == 0:
            save_checkpoint(state, checkpoint_path, config.mode_tag)
        if progress_every and state.t % progress_every == 0:
            logger.info("Processed %d samples (surrogate %.6g)", state.t, report.surrogate)

    return state


def reconstruct(state: BasisState, sample: SampleVector | np.ndarray, config: EngineConfig) -> tuple[np.ndarray, CoeffNoisePair]:
    """Low-rank estimate L r of one column at the current basis, with its solution."""
    sample = _as_sample(sample)
    _check_dimensions(state, sample, config)
    pair = solve_coeff_noise(state.L, sample.observed_values(), regularizer_for(sample, config), config.solver)
    return state.L @ pair.r, pair


def spectral_start(Z: np.ndarray, mask: np.ndarray, config: EngineConfig) -> BasisState:
    """Starting state for in-memory completion: a basis built from the data, empty accumulators.

    The basis spans the top-d left singular vectors of the zero-filled matrix
    divided by the observed fraction. Every column gets length
    ``settings.COMPLETION_HEADROOM`` times the largest estimated column norm
    (observed norm scaled by sqrt(p / observed count)), so each column is
    reachable with ||r|| < 1 from the first sample on. Falls back to
    ``init_engine`` when nothing is observed.
    """
    state = init_engine(config)
    filled = np.where(mask, Z, 0.0)
    observed = mask.sum(axis=0)
    if not observed.any():
        return state
    estimates = np.linalg.norm(filled, axis=0) * np.sqrt(config.p / np.maximum(observed, 1))
    scale = settings.COMPLETION_HEADROOM * float(estimates.max())
    if scale == 0.0:
        return state

    U, _, _ = scipy.linalg.svd(filled / mask.mean(), full_matrices=False)
    k = min(config.d, U.shape[1])
    state.L[:, :k] = scale * U[:, :k]
    if k < config.d:
        extra = state.L[:, k:]
        state.L[:, k:] = scale * extra / np.linalg.norm(extra, axis=0)
    logger.info("Spectral start for completion: column length %.4g", scale)
    return state


def complete_matrix(
    Z: np.ndarray,
    mask: np.ndarray,
    config: EngineConfig,
    *,
    passes: int = 1,
    seed: int = 0,
    sink: ReportSink | None = None,
) -> tuple[np.ndarray, BasisState]:
    """Complete a p x n matrix by streaming its columns ``passes`` times in shuffled order.

    The stream starts from ``spectral_start`` and the accumulators carry over
    between passes. Observed entries are returned unchanged; unobserved ones
    are taken from L r of the column re-solved at the final basis.
    """
    if not config.is_completion:
        raise ValueError("complete_matrix needs a completion-mode config")
    Z = np.asarray(Z, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if Z.shape != mask.shape or Z.shape[0] != config.p:
        raise DimensionMismatchError(f"matrix {Z.shape} and mask {mask.shape} must both be ({config.p}, n)")

    rng = np.random.default_rng(seed)
    n = Z.shape[1]
    state = spectral_start(Z, mask, config)
    for _ in range(passes):
        for j in rng.permutation(n):
            state, report = step(state, SampleVector(values=Z[:, j], mask=mask[:, j]), config, record_timing=False)
            if sink is not None:
                sink(report)

    completed = Z.copy()
    for j in range(n):
        estimate, _ = reconstruct(state, SampleVector(values=Z[:, j], mask=mask[:, j]), config)
        completed[:, j] = np.where(mask[:, j], Z[:, j], estimate)
    return completed, state
