from __future__ import annotations

import json
import logging
from pathlib import Path

from mvmsynth.errors import ReportError
from mvmsynth.metrics import render_ablation_table, render_method_table
from mvmsynth.models.experiment import ExperimentReport

REPORT_JSON = "report.json"


def _fmt(v: float | None) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def _summary_md(report: ExperimentReport) -> str:
    lines: list[str] = []
    lines.append("# Experiment report")
    lines.append("")
    lines.append(f"- **Config hash**: `{report.config_hash}`")
    lines.append(f"- **Dataset hash**: `{report.dataset_hash}`")
    lines.append(f"- **Seed**: {report.seed}")
    lines.append(f"- **Wall clock**: {report.wall_clock_s:.2f}s")
    if report.methods:
        lines.append("")
        lines.append("## Methods")
        for m in report.methods:
            agg = m.metrics.aggregates
            parts = [
                f"{key}={agg[key].short()}"
                for key in ("magnitude.psnr", "phase.psnr", "dice")
                if key in agg
            ]
            vc = report.velocity_coefficients.get(m.method)
            parts.append(f"velocity coefficient={_fmt(vc)}")
            lines.append(f"- **{m.method}**: " + ", ".join(parts))
            if m.metrics.failures:
                lines.append(f"  - failures: {len(m.metrics.failures)}")
        lines.append("")
        lines.append("```")
        lines.append(render_method_table(report).rstrip())
        lines.append("```")
    if report.ablations:
        lines.append("")
        lines.append("## Ablations")
        lines.append("")
        lines.append("```")
        lines.append(render_ablation_table(report).rstrip())
        lines.append("```")
    failures = [f for m in report.methods for f in m.metrics.failures]
    if failures:
        lines.append("\n## Failures")
        for f in failures:
            lines.append(f"- {f}")
    return "\n".join(lines) + "\n"


def render_tables(report: ExperimentReport) -> str:
    parts = []
    if report.methods:
        parts.append(render_method_table(report))
    if report.ablations:
        parts.append(render_ablation_table(report))
    return "\n".join(parts)


def write_report_artifacts(out_dir: Path | str, report: ExperimentReport) -> Path:
    """
    Write standard artifacts:
      - report.json
      - table.txt
      - summary.md
    Returns the output directory.
    """
    if report.is_empty:
        raise ReportError("refusing to write artifacts for an empty report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / REPORT_JSON).write_text(report.model_dump_json(indent=2), encoding="utf-8")
    (out / "table.txt").write_text(render_tables(report), encoding="utf-8")
    summary_text = _summary_md(report)
    (out / "summary.md").write_text(summary_text, encoding="utf-8")
    logging.getLogger("mvmsynth.artifacts").info("\n" + summary_text.rstrip())
    return out


def load_report(path: Path | str) -> ExperimentReport:
    """Read ``report.json`` (or a directory containing it)."""
    p = Path(path)
    if p.is_dir():
        p = p / REPORT_JSON
    if not p.is_file():
        raise ReportError(f"no report at '{p}'")
    try:
        return ExperimentReport.model_validate(json.loads(p.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValueError) as ex:
        raise ReportError(f"invalid report '{p}': {ex}") from ex
