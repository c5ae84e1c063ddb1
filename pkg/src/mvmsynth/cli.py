"""Command-line interface: ``mvmsynth <command> [--config FILE] [flags]``."""

from __future__ import annotations

import functools
import json
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any, Optional, TypeVar

import typer
import yaml
from pydantic import BaseModel

from mvmsynth.errors import MvmError
from mvmsynth.logging import configure_logging
from mvmsynth.settings import apply_torch_runtime, get_settings
from mvmsynth.utils import load_config, merge_overrides

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Temporal super-resolution of cine myocardial velocity mapping.",
)
log = logging.getLogger("mvmsynth.cli")

ModelT = TypeVar("ModelT", bound=BaseModel)
F = TypeVar("F", bound=Callable[..., Any])

ConfigOpt = typer.Option(None, "--config", "-c", help="JSON or YAML config file.")
SetOpt = typer.Option(None, "--set", help="Override, e.g. --set net.base_channels=16.")


def _fail_on_domain_errors(fn: F) -> F:
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except MvmError as ex:
            typer.echo(f"error: {type(ex).__name__}: {ex}", err=True)
            raise typer.Exit(code=1) from ex

    return wrapper  # type: ignore[return-value]


def _parse_sets(items: list[str] | None) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise typer.BadParameter(f"expected key=value, got {item!r}", param_hint="--set")
        out[key.strip()] = yaml.safe_load(raw)
    return out


def _config(
    model: type[ModelT],
    path: Path | None,
    flags: dict[str, Any],
    sets: list[str] | None,
) -> ModelT:
    cfg = load_config(path, model) if path is not None else model()
    return merge_overrides(cfg, {**flags, **_parse_sets(sets)})


def _methods(raw: str) -> list[str]:
    return [m.strip() for m in raw.split(",") if m.strip()]


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, help="Overrides MVMSYNTH_LOG_LEVEL."),
) -> None:
    settings = get_settings()
    configure_logging(log_level or settings.log_level)
    apply_torch_runtime(settings)


# ─────────────────────────────────────────────────────────────────────────────
# Data
# ─────────────────────────────────────────────────────────────────────────────


@app.command()
@_fail_on_domain_errors
def phantom(
    out: Path = typer.Option(..., "--out", "-o", help="Dataset directory."),
    config: Optional[Path] = ConfigOpt,
    n_train: int = typer.Option(20, help="Training subjects."),
    n_val: int = typer.Option(5, help="Validation subjects."),
    n_test: int = typer.Option(5, help="Test subjects."),
    slices: int = typer.Option(1, help="Slices per subject."),
    seed: int = typer.Option(0),
    frames: Optional[int] = typer.Option(None, "--frames", "-T"),
    size: Optional[int] = typer.Option(None, help="Image side (H = W)."),
    sets: Optional[list[str]] = SetOpt,
) -> None:
    """Generate an analytic phantom dataset with a subject-disjoint split.json."""
    from mvmsynth.models.phantom import PhantomConfig
    from mvmsynth.phantom import generate_phantom_dataset

    cfg = _config(PhantomConfig, config, {"T": frames, "H": size, "W": size}, sets)
    split = generate_phantom_dataset(
        cfg, out, n_train=n_train, n_val=n_val, n_test=n_test, slices_per_subject=slices, seed=seed
    )
    counts = f"{len(split.train)}/{len(split.val)}/{len(split.test)}"
    typer.echo(f"wrote {counts} series to {out / 'split.json'}")


# ─────────────────────────────────────────────────────────────────────────────
# Training / evaluation
# ─────────────────────────────────────────────────────────────────────────────


@app.command()
@_fail_on_domain_errors
def train(
    split: Optional[Path] = typer.Option(None, help="split.json (else data.split_path)."),
    out: Path = typer.Option(Path("model.ckpt"), "--out", "-o", help="Best checkpoint path."),
    config: Optional[Path] = ConfigOpt,
    lr: Optional[float] = typer.Option(None, "--lr"),
    batch_size: Optional[int] = typer.Option(None),
    epochs: Optional[int] = typer.Option(None),
    max_steps: Optional[int] = typer.Option(None),
    seed: Optional[int] = typer.Option(None),
    checkpoint_dir: Optional[Path] = typer.Option(None, help="Periodic checkpoints."),
    sets: Optional[list[str]] = SetOpt,
) -> None:
    """Train the multi-task attention UNet."""
    from mvmsynth.io.checkpoint import save_checkpoint
    from mvmsynth.models.experiment import TrainConfig
    from mvmsynth.training import describe
    from mvmsynth.training import train as run_training

    flags = {
        "learning_rate": lr,
        "batch_size": batch_size,
        "epochs": epochs,
        "max_steps": max_steps,
        "seed": seed,
        "checkpoint_dir": None if checkpoint_dir is None else str(checkpoint_dir),
        "data.split_path": None if split is None else str(split),
    }
    cfg = _config(TrainConfig, config, flags, sets)
    ckpt = run_training(cfg)
    save_checkpoint(ckpt, out)
    typer.echo(json.dumps({**describe(ckpt), "checkpoint": str(out)}, indent=2, default=str))


def _write_and_print(report: Any, out: Path | None) -> None:
    from mvmsynth.io.artifacts import render_tables, write_report_artifacts

    typer.echo(render_tables(report))
    if out is not None:
        write_report_artifacts(out, report)
        typer.echo(f"artifacts in {out}")


@app.command()
@_fail_on_domain_errors
def evaluate(
    checkpoint: Path = typer.Option(..., "--checkpoint", help="Checkpoint file."),
    split: Path = typer.Option(..., help="split.json; its test part is evaluated."),
    methods: str = typer.Option("linear,hs_flow,model", help="Comma-separated methods."),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Artifact directory."),
    figures: bool = typer.Option(False, help="Also write panel figures for the first test series."),
    use_gt_masks: Optional[bool] = typer.Option(None, "--use-gt-masks/--predicted-masks"),
    config: Optional[Path] = ConfigOpt,
    sets: Optional[list[str]] = SetOpt,
) -> None:
    """Score the model and baselines on the test split."""
    from mvmsynth.api import evaluate as run_evaluation
    from mvmsynth.io.archive import load_series, load_split
    from mvmsynth.io.checkpoint import load_checkpoint
    from mvmsynth.models.experiment import EvalConfig

    cfg = _config(EvalConfig, config, {"use_gt_masks": use_gt_masks}, sets)
    data = load_split(split)
    ckpt = load_checkpoint(checkpoint)
    report = run_evaluation(ckpt, data, _methods(methods), cfg)
    _write_and_print(report, out)
    if figures and out is not None and data.test:
        from mvmsynth.io.figures import emit_figures

        emit_figures(report, load_series(data.test[0].path), ckpt, out / "figures", eval_cfg=cfg)


@app.command()
@_fail_on_domain_errors
def baseline(
    split: Path = typer.Option(..., help="split.json; its test part is evaluated."),
    methods: str = typer.Option("linear,hs_flow", help="linear and/or hs_flow."),
    out: Optional[Path] = typer.Option(None, "--out", "-o"),
    alpha: Optional[float] = typer.Option(None, help="Horn-Schunck smoothness weight."),
    iterations: Optional[int] = typer.Option(None, help="Horn-Schunck iterations."),
    config: Optional[Path] = ConfigOpt,
    sets: Optional[list[str]] = SetOpt,
) -> None:
    """Score the classical baselines only."""
    from mvmsynth.api import evaluate as run_evaluation
    from mvmsynth.io.archive import load_split
    from mvmsynth.models.experiment import EvalConfig

    cfg = _config(EvalConfig, config, {"hs.alpha": alpha, "hs.iterations": iterations}, sets)
    chosen = _methods(methods)
    if "model" in chosen:
        raise typer.BadParameter("use 'evaluate' for the model", param_hint="--methods")
    report = run_evaluation(None, load_split(split), chosen, cfg)
    _write_and_print(report, out)


@app.command()
@_fail_on_domain_errors
def ablate(
    split: Path = typer.Option(..., help="split.json"),
    out: Optional[Path] = typer.Option(None, "--out", "-o"),
    config: Optional[Path] = ConfigOpt,
    max_steps: Optional[int] = typer.Option(None),
    seed: Optional[int] = typer.Option(None),
    sets: Optional[list[str]] = SetOpt,
) -> None:
    """Train and score the four ablation rows."""
    from mvmsynth.api import run_ablations
    from mvmsynth.io.archive import load_split
    from mvmsynth.models.experiment import TrainConfig

    cfg = _config(TrainConfig, config, {"max_steps": max_steps, "seed": seed}, sets)
    report = run_ablations(cfg, load_split(split))
    _write_and_print(report, out)


# ─────────────────────────────────────────────────────────────────────────────
# Analysis / reporting
# ─────────────────────────────────────────────────────────────────────────────


@app.command()
@_fail_on_domain_errors
def velocity(
    series: Path = typer.Argument(..., help="Series archive directory."),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Curves JSON path."),
    plot: Optional[Path] = typer.Option(None, help="Curves PNG path."),
    phantom_config: Optional[Path] = typer.Option(
        None, help="Phantom config to compare against its closed-form curves."
    ),
) -> None:
    """Extract global longitudinal / radial / circumferential velocity curves."""
    from mvmsynth.io.archive import load_series
    from mvmsynth.velocity import curves_to_json, velocity_coefficient, velocity_curves

    curves = velocity_curves(load_series(series))
    text = curves_to_json(curves, out)
    if out is None:
        typer.echo(text)
    analytic = None
    if phantom_config is not None:
        from mvmsynth.models.phantom import PhantomConfig
        from mvmsynth.phantom import analytic_velocity_curves

        analytic = analytic_velocity_curves(load_config(phantom_config, PhantomConfig))
        coefficient = velocity_coefficient(curves, analytic)
        typer.echo(f"velocity coefficient vs closed form: {coefficient:.4f}")
    if plot is not None:
        from mvmsynth.io.figures import plot_velocity_curves

        if analytic is not None:
            plot_velocity_curves(analytic, plot, curves)
        else:
            plot_velocity_curves(curves, plot)


@app.command()
@_fail_on_domain_errors
def report(
    path: Path = typer.Argument(..., help="report.json or the directory holding it."),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Rewrite artifacts here."),
) -> None:
    """Re-render tables from a saved report."""
    from mvmsynth.errors import ReportError
    from mvmsynth.io.artifacts import load_report

    loaded = load_report(path)
    if loaded.is_empty:
        raise ReportError(f"report '{path}' has no rows")
    _write_and_print(loaded, out)


if __name__ == "__main__":  # pragma: no cover
    app()
