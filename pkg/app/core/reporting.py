"""CSV outputs; every file starts with the fingerprint of the run configuration."""
import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from app.schemas.engine import StepReport

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ["t", "ev", "surrogate", "eta", "coeff_iters", "wall_nanos"]


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], fingerprint: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# fingerprint={fingerprint}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(value) for value in row])
    logger.debug("Wrote %s", path)
    return path


def write_matrix(path: Path, matrix: np.ndarray, fingerprint: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g", header=f"fingerprint={fingerprint}")
    return path


class MetricsWriter:
    """Report sink that writes every ``every``-th report, plus the last one on close."""

    def __init__(self, path: Path, fingerprint: str, every: int = 1):
        self.path = path
        self.every = every
        self._last: StepReport | None = None
        self._last_written = 0
        path.parent.mkdir(parents=True, exist_ok=True)
        self._handle: TextIO = open(path, "w", newline="", encoding="utf-8")
        self._handle.write(f"# fingerprint={fingerprint}\n")
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(METRICS_COLUMNS)

    def _write(self, report: StepReport) -> None:
        self._writer.writerow(
            [_format(value) for value in (report.t, report.ev, report.surrogate, report.eta, report.coeff_iters, report.wall_nanos)]
        )
        self._last_written = report.t

    def __call__(self, report: StepReport) -> None:
        self._last = report
        if report.t % self.every == 0:
            self._write(report)

    def close(self, final: StepReport | None = None) -> None:
        """Write the final report if the cadence skipped it, then close the file."""
        last = final or self._last
        if last is not None and last.t != self._last_written:
            self._write(last)
        self._handle.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(self, *exc_info: object) -> None:
        if not self._handle.closed:
            self.close()
