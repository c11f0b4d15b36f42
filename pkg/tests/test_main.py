"""Integration tests for the command-line front end."""
import json
from pathlib import Path

from typer.testing import CliRunner

from app.main import app

runner = CliRunner()


def test_help():
    """Test every command is listed."""
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for command in ("decompose", "complete", "synth-bench", "grid", "sweep"):
        assert command in result.output


def test_synth_bench(tmp_path: Path):
    """Test a small benchmark run succeeds and writes its outputs."""
    out = tmp_path / "out"
    result = runner.invoke(app, ["synth-bench", "--synth", "10,30,2,0.1", "--report-every", "10", "--out", str(out), "--no-timing"])
    assert result.exit_code == 0, result.output
    summary = json.loads(result.stdout.strip().splitlines()[-1])
    assert summary["t"] == 30
    for name in ("basis.csv", "metrics.csv", "state.omrx"):
        assert (out / name).exists()


def test_decompose_from_file(tmp_path: Path):
    """Test decompose streams a CSV file."""
    path = tmp_path / "stream.csv"
    path.write_text("\n".join(",".join(str(i * j % 7) for j in range(5)) for i in range(12)) + "\n")
    result = runner.invoke(app, ["decompose", "--input", str(path), "--d", "2", "--mode", "l2", "--out", str(tmp_path / "out")])
    assert result.exit_code == 0, result.output


def test_conflicting_inputs(tmp_path: Path):
    """Test --input with --synth exits with the usage code."""
    path = tmp_path / "stream.csv"
    path.write_text("1,2\n")
    result = runner.invoke(app, ["decompose", "--input", str(path), "--synth", "2,5,1,0.0"])
    assert result.exit_code == 2
    assert "mutually exclusive" in result.stderr


def test_unknown_option():
    """Test an unknown flag is rejected."""
    result = runner.invoke(app, ["synth-bench", "--rank", "3"])
    assert result.exit_code == 2


def test_malformed_input(tmp_path: Path):
    """Test a parse error exits with the data code and names the line."""
    path = tmp_path / "stream.csv"
    path.write_text("1,2,3\n4,5\n")
    result = runner.invoke(app, ["decompose", "--input", str(path), "--d", "1", "--out", str(tmp_path / "out")])
    assert result.exit_code == 65
    assert "line 2" in result.stderr


def test_corrupt_checkpoint(tmp_path: Path):
    """Test resuming from a damaged checkpoint exits with the checkpoint code."""
    bad = tmp_path / "bad.omrx"
    bad.write_bytes(b"OMRX" + b"\x00" * 10)
    result = runner.invoke(app, ["synth-bench", "--synth", "6,10,2,0.0", "--resume", str(bad), "--out", str(tmp_path / "out")])
    assert result.exit_code == 66


def test_grid(tmp_path: Path):
    """Test the grid command writes its tables."""
    out = tmp_path / "out"
    result = runner.invoke(app, ["grid", "--synth", "6,10,2,0.1", "--grid", "1,2;0.0;1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "grid.csv").exists()
    assert (out / "grid_heatmap.csv").exists()


def test_config_file(tmp_path: Path):
    """Test values from --config are used and unknown keys are refused."""
    config = tmp_path / "run.env"
    config.write_text("synth=6,10,2,0.0\nreport_every=5\n")
    result = runner.invoke(app, ["synth-bench", "--config", str(config), "--out", str(tmp_path / "out")])
    assert result.exit_code == 0, result.output

    config.write_text("rank=3\n")
    result = runner.invoke(app, ["synth-bench", "--config", str(config)])
    assert result.exit_code == 2
    assert "rank" in result.stderr
