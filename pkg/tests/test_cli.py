"""Tests for the command-line interface."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from mvmsynth.cli import app

runner = CliRunner()


@pytest.fixture
def dataset(tmp_path: Path) -> Path:
    out = tmp_path / "data"
    result = runner.invoke(
        app,
        [
            "phantom",
            "--out", str(out),
            "--n-train", "1",
            "--n-val", "1",
            "--n-test", "1",
            "-T", "6",
            "--size", "64",
            "--set", "noise_sigma=0.0",
        ],
    )
    assert result.exit_code == 0, result.output
    return out


class TestPhantomCommand:
    def test_writes_split(self, dataset: Path) -> None:
        """Test that the phantom command writes one series per subject and a split."""
        split = json.loads((dataset / "split.json").read_text(encoding="utf-8"))
        assert [len(split[p]) for p in ("train", "val", "test")] == [1, 1, 1]
        assert (dataset / "series").is_dir()

    def test_bad_set_syntax(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["phantom", "--out", str(tmp_path), "--set", "noequals"])
        assert result.exit_code == 2

    def test_invalid_geometry_is_domain_error(self, tmp_path: Path) -> None:
        """Test that domain errors exit with code 1 and a one-line message."""
        result = runner.invoke(
            app, ["phantom", "--out", str(tmp_path), "--set", "endo_radius_mm=40"]
        )
        assert result.exit_code == 1
        assert "ArgumentError" in result.output


class TestEvaluationCommands:
    def test_baseline(self, dataset: Path, tmp_path: Path) -> None:
        out = tmp_path / "baseline"
        result = runner.invoke(
            app,
            [
                "baseline",
                "--split", str(dataset / "split.json"),
                "--methods", "linear,hs_flow",
                "--iterations", "10",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        assert "Linear interpolation" in result.output
        assert "Horn-Schunck flow" in result.output
        assert (out / "report.json").exists()

    def test_baseline_refuses_model(self, dataset: Path) -> None:
        result = runner.invoke(
            app, ["baseline", "--split", str(dataset / "split.json"), "--methods", "model"]
        )
        assert result.exit_code == 2

    def test_train_then_evaluate(self, dataset: Path, tmp_path: Path) -> None:
        """Test a one-step training run followed by evaluation of its checkpoint."""
        ckpt = tmp_path / "model.ckpt"
        result = runner.invoke(
            app,
            [
                "train",
                "--split", str(dataset / "split.json"),
                "--out", str(ckpt),
                "--max-steps", "1",
                "--batch-size", "2",
                "--set", "net.base_channels=4",
            ],
        )
        assert result.exit_code == 0, result.output
        assert ckpt.exists()
        out = tmp_path / "eval"
        result = runner.invoke(
            app,
            [
                "evaluate",
                "--checkpoint", str(ckpt),
                "--split", str(dataset / "split.json"),
                "--methods", "linear,model",
                "--out", str(out),
                "--figures",
            ],
        )
        assert result.exit_code == 0, result.output
        assert "Multi-task attention UNet" in result.output
        assert len(list((out / "figures").glob("*.png"))) == 4

    def test_report_rerenders(self, dataset: Path, tmp_path: Path) -> None:
        out = tmp_path / "baseline"
        runner.invoke(
            app,
            ["baseline", "--split", str(dataset / "split.json"), "--methods", "linear",
             "--out", str(out)],
        )
        result = runner.invoke(app, ["report", str(out)])
        assert result.exit_code == 0, result.output
        assert "Linear interpolation" in result.output

    def test_report_missing(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["report", str(tmp_path)])
        assert result.exit_code == 1
        assert "ReportError" in result.output


class TestVelocityCommand:
    def test_curves_and_closed_form(self, dataset: Path, tmp_path: Path) -> None:
        series = next((dataset / "series").iterdir())
        cfg = tmp_path / "phantom.yaml"
        cfg.write_text("T: 6\nnoise_sigma: 0.0\n", encoding="utf-8")
        out = tmp_path / "curves.json"
        plot = tmp_path / "curves.png"
        result = runner.invoke(
            app,
            [
                "velocity",
                str(series),
                "--out", str(out),
                "--plot", str(plot),
                "--phantom-config", str(cfg),
            ],
        )
        assert result.exit_code == 0, result.output
        assert "velocity coefficient vs closed form" in result.output
        data = json.loads(out.read_text(encoding="utf-8"))
        assert len(data["longitudinal"]) == 6
        assert plot.exists()

    def test_prints_json_without_out(self, dataset: Path) -> None:
        series = next((dataset / "series").iterdir())
        result = runner.invoke(app, ["velocity", str(series)])
        assert result.exit_code == 0, result.output
        assert '"radial"' in result.output
