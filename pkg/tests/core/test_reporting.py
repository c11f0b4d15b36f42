"""Unit tests for CSV outputs."""
from pathlib import Path

import numpy as np

from app.core.reporting import METRICS_COLUMNS, MetricsWriter, write_csv, write_matrix
from app.schemas.engine import StepReport


def _report(t: int) -> StepReport:
    return StepReport(t=t, eta=0.5, coeff_iters=3, kkt_residual=0.0, surrogate=1.0 / t, wall_nanos=0)


def test_metrics_writer_cadence(tmp_path: Path):
    """Test every n-th report is written and the last one is never lost."""
    path = tmp_path / "metrics.csv"
    with MetricsWriter(path, "abc", every=3) as writer:
        for t in range(1, 8):
            writer(_report(t))
    lines = path.read_text().splitlines()
    assert lines[0] == "# fingerprint=abc"
    assert lines[1] == ",".join(METRICS_COLUMNS)
    assert [line.split(",")[0] for line in lines[2:]] == ["3", "6", "7"]


def test_metrics_writer_ev_column(tmp_path: Path):
    """Test a missing EV is written as an empty field."""
    path = tmp_path / "metrics.csv"
    with MetricsWriter(path, "abc") as writer:
        writer(_report(1))
        writer(_report(2).model_copy(update={"ev": 0.75}))
    rows = path.read_text().splitlines()[2:]
    assert rows[0].split(",")[1] == ""
    assert rows[1].split(",")[1] == "0.75"


def test_write_csv_header(tmp_path: Path):
    """Test the fingerprint line precedes the column header."""
    path = write_csv(tmp_path / "sub" / "table.csv", ["a", "b"], [(1, 0.5)], "f00d")
    assert path.read_text().splitlines() == ["# fingerprint=f00d", "a,b", "1,0.5"]


def test_write_matrix_round_trip(tmp_path: Path, rng: np.random.Generator):
    """Test matrices are written at full precision."""
    M = rng.normal(size=(4, 3))
    path = write_matrix(tmp_path / "basis.csv", M, "f00d")
    assert path.read_text().startswith("# fingerprint=f00d")
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=","), M)
