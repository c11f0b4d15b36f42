"""Tests for the ambient-dimension sweep."""
from pathlib import Path

from app.core.manifest import parse_config
from app.core.tasks.sweep_runs import run_dimension_sweep, run_sweep
from app.schemas.engine import EngineConfig


def test_dimension_sweep_curves():
    """Test one EV curve per dimension at the report cadence."""
    curves = run_dimension_sweep([10, 20], EngineConfig(p=10, d=1), n=40, rho=0.3, report_every=10)
    assert sorted(curves) == [10, 20]
    for curve in curves.values():
        assert [report.t for report in curve] == [10, 20, 30, 40]
        assert all(0.0 <= report.ev <= 1.0 for report in curve)


def test_dimension_sweep_final_point():
    """Test the last sample is reported even off the cadence."""
    curves = run_dimension_sweep([10], EngineConfig(p=10, d=1), n=25, report_every=10)
    assert [report.t for report in curves[10]] == [10, 20, 25]


def test_run_sweep_writes_csv(out_dir: Path):
    """Test the sweep table."""
    manifest = parse_config("sweep", {"synth": "10,20,1,0.3", "sweep": "10,20", "report_every": 10, "out": out_dir})
    summary = run_sweep(manifest)
    assert summary.ev is not None
    lines = (out_dir / "sweep.csv").read_text().splitlines()
    assert lines[1] == "p,t,ev"
    assert [line.split(",")[:2] for line in lines[2:]] == [["10", "10"], ["10", "20"], ["20", "10"], ["20", "20"]]
