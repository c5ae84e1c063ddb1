import json
import tempfile
from pathlib import Path

import pytest

from mvmsynth.errors import ReportError
from mvmsynth.io.artifacts import _summary_md, load_report, render_tables, write_report_artifacts
from mvmsynth.metrics import build_metric_report
from mvmsynth.models.experiment import AblationResult, ExperimentReport, MethodResult
from mvmsynth.models.metrics import ModalityMetrics, SampleMetrics


def _sample(key: str, mae: float, psnr: float, dice: float | None = 0.9) -> SampleMetrics:
    return SampleMetrics(
        key=key,
        magnitude=ModalityMetrics(mae=mae, psnr=psnr, ssim=0.8),
        phase=ModalityMetrics(mae=2 * mae, psnr=psnr - 3, ssim=0.7),
        dice=dice,
    )


def _report() -> ExperimentReport:
    linear = build_metric_report(
        [_sample("s/a:tau=0:k=1", 0.02, 30.0, None), _sample("s/a:tau=0:k=2", 0.04, 28.0, None)],
        velocity_per_series={"s/a": 0.8},
    )
    model = build_metric_report(
        [_sample("s/a:tau=0:k=1", 0.01, 35.0)],
        velocity_per_series={"s/a": None},
        failures=["s/a: velocity: correlation of a constant series (radial)"],
    )
    return ExperimentReport(
        methods=[
            MethodResult(method="linear", metrics=linear),
            MethodResult(method="model", metrics=model),
        ],
        velocity_coefficients={"linear": 0.8, "model": None},
        wall_clock_s=1.5,
        config_hash="abc",
        dataset_hash="def",
        seed=7,
    )


class TestSummaryMdFunction:
    """Tests for the _summary_md function."""

    def test_basic_summary(self) -> None:
        """Test header fields and per-method lines."""
        summary = _summary_md(_report())
        assert "# Experiment report" in summary
        assert "- **Config hash**: `abc`" in summary
        assert "- **Dataset hash**: `def`" in summary
        assert "- **Seed**: 7" in summary
        assert "- **Wall clock**: 1.50s" in summary
        assert "- **linear**: magnitude.psnr=29.000 ± 1.000" in summary
        assert "velocity coefficient=0.8000" in summary
        assert "velocity coefficient=n/a" in summary

    def test_failures_listed(self) -> None:
        """Test that failures are counted per method and listed at the end."""
        summary = _summary_md(_report())
        assert "  - failures: 1" in summary
        assert "## Failures" in summary
        assert "- s/a: velocity: correlation of a constant series (radial)" in summary

    def test_ablation_section(self) -> None:
        """Test that ablation rows get their own section."""
        row = AblationResult(
            row="full",
            independent_encoders=True,
            independent_decoders=True,
            shared_bottleneck=True,
            weighted_loss=True,
            magnitude_psnr=31.0,
        )
        summary = _summary_md(ExperimentReport(ablations=[row]))
        assert "## Ablations" in summary
        assert "## Methods" not in summary
        assert "31.000" in summary


class TestWriteReportArtifacts:
    """Tests for write_report_artifacts and load_report."""

    def test_creates_all_files(self) -> None:
        """Test that report.json, table.txt and summary.md are written."""
        with tempfile.TemporaryDirectory() as tmp:
            out = write_report_artifacts(Path(tmp) / "run", _report())
            assert (out / "report.json").exists()
            assert (out / "table.txt").read_text(encoding="utf-8") == render_tables(_report())
            assert (out / "summary.md").read_text(encoding="utf-8").startswith("# Experiment")
            data = json.loads((out / "report.json").read_text(encoding="utf-8"))
            assert data["seed"] == 7
            assert [m["method"] for m in data["methods"]] == ["linear", "model"]

    def test_round_trip(self) -> None:
        """Test that a saved report loads back unchanged, from the file or its directory."""
        with tempfile.TemporaryDirectory() as tmp:
            out = write_report_artifacts(tmp, _report())
            assert load_report(out) == _report()
            assert load_report(out / "report.json") == _report()

    def test_infinite_psnr_survives(self) -> None:
        """Test that an infinite PSNR (identical frames) is stored and read back."""
        metrics = build_metric_report([_sample("k", 0.0, float("inf"))])
        report = ExperimentReport(methods=[MethodResult(method="linear", metrics=metrics)])
        with tempfile.TemporaryDirectory() as tmp:
            loaded = load_report(write_report_artifacts(tmp, report))
        assert loaded.method("linear").metrics.value("magnitude.psnr") == float("inf")

    def test_empty_report_rejected(self) -> None:
        """Test that an empty report is not written."""
        with tempfile.TemporaryDirectory() as tmp:
            with pytest.raises(ReportError):
                write_report_artifacts(tmp, ExperimentReport())

    def test_missing_and_invalid(self) -> None:
        """Test that missing or malformed report files raise ReportError."""
        with tempfile.TemporaryDirectory() as tmp:
            with pytest.raises(ReportError):
                load_report(tmp)
            bad = Path(tmp) / "report.json"
            bad.write_text("{not json", encoding="utf-8")
            with pytest.raises(ReportError):
                load_report(bad)
            bad.write_text(json.dumps({"methods": "nope"}), encoding="utf-8")
            with pytest.raises(ReportError):
                load_report(bad)
