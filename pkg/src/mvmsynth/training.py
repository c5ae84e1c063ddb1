"""Training loop for the multi-task attention UNet.

The trainer handles:
    * dataset / loader construction from a subject-disjoint split
    * seeded initialisation and shuffling
    * optimisation with early stopping on validation loss
    * periodic and best checkpoints
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from mvmsynth.errors import TrainingError
from mvmsynth.io.archive import load_series, load_split
from mvmsynth.io.checkpoint import save_checkpoint
from mvmsynth.logging import log_duration
from mvmsynth.losses import Predictions, Targets, prepare_targets, total_loss
from mvmsynth.models.experiment import TrainConfig
from mvmsynth.models.loss import LossBreakdown, LossConfig
from mvmsynth.models.network import Checkpoint, TrainingMetadata
from mvmsynth.models.sample import ANCHOR_GAP
from mvmsynth.models.series import DatasetSplit, MVMSeries
from mvmsynth.network.unet import MultiTaskAttentionUNet, to_checkpoint
from mvmsynth.sampling import K_VALUES, make_sample
from mvmsynth.settings import apply_torch_runtime, get_settings

log = logging.getLogger("mvmsynth.training")

_INPUT_KEYS = ("mag_in", "phase_in", "mask_in", "condition")
_TARGET_KEYS = ("mag", "phase", "mask", "omega1", "omega2", "sdm")


# ─────────────────────────────────────────────────────────────────────────────
# Data
# ─────────────────────────────────────────────────────────────────────────────


class SynthesisDataset(Dataset):
    """Every (tau, k) sample of a list of series, cut and weighted on access."""

    def __init__(self, series: list[MVMSeries], loss_cfg: LossConfig | None = None) -> None:
        self.series = series
        self.loss_cfg = loss_cfg or LossConfig()
        self.index: list[tuple[int, int, int]] = []
        for i, s in enumerate(series):
            if s.T < ANCHOR_GAP + 1:
                log.warning("skipping %s/%s: T=%d too short", s.subject_id, s.slice_id, s.T)
                continue
            self.index.extend((i, tau, k) for tau in range(s.T - ANCHOR_GAP) for k in K_VALUES)

    def __len__(self) -> int:
        return len(self.index)

    def __repr__(self) -> str:
        return f"SynthesisDataset(series={len(self.series)}, samples={len(self)})"

    def __getitem__(self, idx: int) -> dict[str, torch.Tensor]:
        i, tau, k = self.index[idx]
        sample = make_sample(self.series[i], tau, k)
        tg = prepare_targets(sample, self.loss_cfg)
        arrays = {
            "mag_in": sample.mag_in,
            "phase_in": sample.phase_in,
            "mask_in": sample.mask_in,
            "condition": sample.condition.values,
            "mag": sample.mag_target,
            "phase": sample.phase_target,
            "mask": sample.mask_target,
            "omega1": tg.omega1,
            "omega2": tg.omega2,
            "sdm": tg.sdm,
        }
        return {
            k: torch.from_numpy(np.ascontiguousarray(v, dtype=np.float32))
            for k, v in arrays.items()
        }


def collate_samples(items: list[dict[str, torch.Tensor]]) -> dict[str, torch.Tensor]:
    """Stack per-sample tensors along a new batch axis."""
    if not items:
        raise TrainingError("cannot collate an empty batch")
    return {k: torch.stack([it[k] for it in items]) for k in items[0]}


def split_series(split: DatasetSplit, part: str) -> list[MVMSeries]:
    return [load_series(ref.path) for ref in getattr(split, part)]


def _inputs(batch: dict[str, torch.Tensor]) -> tuple[torch.Tensor, ...]:
    return tuple(batch[k] for k in _INPUT_KEYS)


def _targets(batch: dict[str, torch.Tensor]) -> Targets:
    return Targets(*(batch[k] for k in _TARGET_KEYS))


# ─────────────────────────────────────────────────────────────────────────────
# Trainer
# ─────────────────────────────────────────────────────────────────────────────


class Trainer:
    """Seeded Adam training of one network configuration."""

    def __init__(
        self,
        cfg: TrainConfig,
        train_series: list[MVMSeries],
        val_series: list[MVMSeries] | None = None,
        device: str | None = None,
    ) -> None:
        self.cfg = cfg
        self.device = torch.device(device or get_settings().device)
        self.train_set = SynthesisDataset(train_series, cfg.loss)
        self.val_set = SynthesisDataset(val_series or [], cfg.loss)
        if len(self.train_set) == 0:
            raise TrainingError("training split yields no samples")

        torch.manual_seed(cfg.seed)
        self.model = MultiTaskAttentionUNet(cfg.net).to(self.device)
        self.optimizer = torch.optim.Adam(
            self.model.parameters(), lr=cfg.learning_rate, betas=(cfg.beta1, cfg.beta2)
        )
        generator = torch.Generator()
        generator.manual_seed(cfg.seed)
        self.train_loader = DataLoader(
            self.train_set,
            batch_size=cfg.batch_size,
            shuffle=True,
            generator=generator,
            collate_fn=collate_samples,
            num_workers=cfg.num_workers,
        )
        self.val_loader = DataLoader(
            self.val_set,
            batch_size=cfg.batch_size,
            shuffle=False,
            collate_fn=collate_samples,
            num_workers=cfg.num_workers,
        )
        self.step = 0
        self.loss_history: list[dict[str, float]] = []
        self.val_history: list[dict[str, float]] = []
        self.best_val: float | None = None
        self._best_state: dict[str, torch.Tensor] | None = None
        self._bad_evals = 0

    # ── single steps ───────────────────────────────────────────────────────

    def _to_device(self, batch: dict[str, torch.Tensor]) -> dict[str, torch.Tensor]:
        return {k: v.to(self.device) for k, v in batch.items()}

    def train_step(self, batch: dict[str, torch.Tensor]) -> LossBreakdown:
        self.model.train()
        batch = self._to_device(batch)
        preds: Predictions = self.model(*_inputs(batch))
        loss, breakdown = total_loss(preds, _targets(batch), self.cfg.loss)
        if not torch.isfinite(loss):
            dump = self._dump_batch(batch)
            raise TrainingError(
                f"non-finite loss at step {self.step + 1}; offending batch written to {dump}"
            )
        self.optimizer.zero_grad(set_to_none=True)
        loss.backward()
        self.optimizer.step()
        return breakdown

    @torch.no_grad()
    def validate(self) -> float:
        """Sample-weighted mean total loss over the validation set."""
        self.model.eval()
        total, n = 0.0, 0
        for batch in self.val_loader:
            batch = self._to_device(batch)
            preds = self.model(*_inputs(batch))
            _, breakdown = total_loss(preds, _targets(batch), self.cfg.loss)
            b = int(batch["mag"].shape[0])
            total += breakdown.total * b
            n += b
        self.model.train()
        return total / max(n, 1)

    def _dump_batch(self, batch: dict[str, torch.Tensor]) -> Path:
        out = Path(self.cfg.checkpoint_dir or get_settings().artifacts_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"nonfinite_batch_step{self.step + 1:06d}.npz"
        np.savez(path, **{k: v.detach().cpu().numpy() for k, v in batch.items()})
        return path

    # ── checkpoints ────────────────────────────────────────────────────────

    def metadata(self) -> TrainingMetadata:
        return TrainingMetadata(
            step=self.step,
            seed=self.cfg.seed,
            best_val_loss=self.best_val,
            loss_history=list(self.loss_history),
            val_history=list(self.val_history),
        )

    def checkpoint(self, best: bool = True) -> Checkpoint:
        ckpt = to_checkpoint(self.model, self.metadata())
        if best and self._best_state is not None:
            ckpt.parameters = {
                k: v.numpy().astype(np.float32) for k, v in self._best_state.items()
            }
        return ckpt

    def _save(self, name: str, best: bool) -> None:
        if self.cfg.checkpoint_dir is None:
            return
        save_checkpoint(self.checkpoint(best=best), Path(self.cfg.checkpoint_dir) / name)

    def _evaluate_and_track(self) -> bool:
        """Run validation; return True when early stopping should trigger."""
        val = self.validate()
        self.val_history.append({"step": float(self.step), "total": val})
        improved = self.best_val is None or val < self.best_val
        if improved:
            self.best_val = val
            self._bad_evals = 0
            self._best_state = {
                k: v.detach().cpu().clone() for k, v in self.model.state_dict().items()
            }
        else:
            self._bad_evals += 1
        log.info(
            "step %d val_total=%.6f best=%.6f%s",
            self.step,
            val,
            self.best_val,
            " (improved)" if improved else "",
        )
        self._save(f"step_{self.step:06d}.ckpt", best=False)
        if improved:
            self._save("best.ckpt", best=True)
        return self._bad_evals >= self.cfg.patience

    # ── loop ───────────────────────────────────────────────────────────────

    def fit(self) -> Checkpoint:
        cfg = self.cfg
        has_val = len(self.val_set) > 0
        log.info(
            "training: %s, val=%d samples, lr=%g, batch=%d, seed=%d",
            self.train_set,
            len(self.val_set),
            cfg.learning_rate,
            cfg.batch_size,
            cfg.seed,
        )
        stop = False
        for epoch in range(cfg.epochs):
            for batch in self.train_loader:
                breakdown = self.train_step(batch)
                self.step += 1
                self.loss_history.append({"step": float(self.step), **breakdown.model_dump()})
                if self.step % cfg.log_every == 0 or self.step == 1:
                    log.info(
                        "epoch %d step %d total=%.6f mag=%.6f phase=%.6f dice=%.6f boundary=%.6f",
                        epoch,
                        self.step,
                        breakdown.total,
                        breakdown.syn_mag,
                        breakdown.syn_phase,
                        breakdown.dice,
                        breakdown.boundary,
                    )
                if has_val and self.step % cfg.eval_every == 0 and self._evaluate_and_track():
                    log.info("early stopping at step %d (patience %d)", self.step, cfg.patience)
                    stop = True
                if cfg.max_steps is not None and self.step >= cfg.max_steps:
                    stop = True
                if stop:
                    break
            if stop:
                break
        if has_val and (not self.val_history or self.val_history[-1]["step"] != self.step):
            self._evaluate_and_track()
        self._save("last.ckpt", best=False)
        return self.checkpoint(best=True)


def train(
    cfg: TrainConfig,
    split: DatasetSplit | None = None,
    *,
    train_series: list[MVMSeries] | None = None,
    val_series: list[MVMSeries] | None = None,
) -> Checkpoint:
    """Train a network and return the best-validation checkpoint.

    Data comes from ``train_series`` / ``val_series`` when given, else from
    ``split`` or ``cfg.data.split_path``.
    """
    apply_torch_runtime()
    if train_series is None:
        if split is None:
            if cfg.data.split_path is None:
                raise TrainingError("no training data: pass a split or set data.split_path")
            split = load_split(cfg.data.split_path)
        if not split.train:
            raise TrainingError("split has no training series")
        train_series = split_series(split, "train")
        val_series = split_series(split, "val")
    if not train_series:
        raise TrainingError("no training series")
    trainer = Trainer(cfg, train_series, val_series)
    with log_duration(log, "training"):
        ckpt = trainer.fit()
    best = ckpt.metadata.best_val_loss
    log.info(
        "training finished after %d steps; best val loss %s",
        ckpt.metadata.step,
        "n/a" if best is None or math.isnan(best) else f"{best:.6f}",
    )
    return ckpt


def loss_trace(ckpt: Checkpoint) -> list[float]:
    """Per-step total training loss recorded in a checkpoint."""
    return [float(h["total"]) for h in ckpt.metadata.loss_history]


def describe(ckpt: Checkpoint) -> dict[str, Any]:
    m = ckpt.metadata
    return {
        "step": m.step,
        "seed": m.seed,
        "best_val_loss": m.best_val_loss,
        "config": ckpt.config.model_dump(),
    }
