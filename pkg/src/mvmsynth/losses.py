"""Training losses: weight maps, weighted MAE, soft Dice, boundary loss and their sum.

Reductions run over the last three axes (C, H, W); leading axes are kept, so a
batched call returns one value per sample and ``total_loss`` averages them.
Weight maps and signed distance maps are computed once per sample in numpy.
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Sequence

import numpy as np
import torch
from scipy import ndimage
from skimage.morphology import disk

from mvmsynth.errors import DegenerateError, ShapeError
from mvmsynth.models.loss import LossBreakdown, LossConfig, SampleTargets
from mvmsynth.models.sample import SynthesisSample

log = logging.getLogger("mvmsynth.losses")

ArrayLike = torch.Tensor | np.ndarray

# ─────────────────────────────────────────────────────────────────────────────
# Weight maps (numpy, per sample)
# ─────────────────────────────────────────────────────────────────────────────


def denoise_weight_map(mag_target: np.ndarray, bg_threshold: float = 0.1) -> np.ndarray:
    """omega1: 1 where the target magnitude is brighter than ``bg_threshold``."""
    mag = np.asarray(mag_target)
    if mag.ndim == 3:
        mag = mag[0]
    return (mag > bg_threshold).astype(np.float32)


def myocardium_weight_map(
    masks: Sequence[np.ndarray] | np.ndarray, dilation_px: int = 2
) -> np.ndarray:
    """omega2: dilated union of the hole-filled epicardial regions of the given masks."""
    stack = [np.asarray(m).reshape(np.asarray(m).shape[-2:]) > 0.5 for m in masks]
    if not stack:
        raise ShapeError("myocardium_weight_map needs at least one mask")
    union = np.zeros_like(stack[0], dtype=bool)
    for m in stack:
        union |= ndimage.binary_fill_holes(m)
    if not union.any():
        log.warning("myocardium weight map: empty mask union, omega2 is all zero")
        return np.zeros(union.shape, dtype=np.float32)
    if dilation_px > 0:
        union = ndimage.binary_dilation(union, structure=disk(dilation_px).astype(bool))
    return union.astype(np.float32)


def signed_distance_map(mask_gt: np.ndarray) -> np.ndarray:
    """Euclidean level-set map: negative inside, positive outside, 0 on the inner boundary.

    Outside pixels hold the distance to the nearest foreground pixel; inside
    pixels hold minus (distance to the nearest background pixel - 1).
    """
    pos = np.asarray(mask_gt).reshape(np.asarray(mask_gt).shape[-2:]) > 0.5
    if not pos.any():
        raise DegenerateError("signed distance map of an empty mask is undefined")
    if pos.all():
        raise DegenerateError("signed distance map of a full mask is undefined")
    neg = ~pos
    outside = ndimage.distance_transform_edt(neg) * neg
    inside = (ndimage.distance_transform_edt(pos) - 1.0) * pos
    return (outside - inside).astype(np.float32)


# ─────────────────────────────────────────────────────────────────────────────
# Differentiable terms (torch)
# ─────────────────────────────────────────────────────────────────────────────

_CHW = (-3, -2, -1)


def _t(x: ArrayLike, like: torch.Tensor | None = None) -> torch.Tensor:
    t = torch.as_tensor(x)
    if like is not None:
        t = t.to(dtype=like.dtype, device=like.device)
    return t


def weighted_mae(
    pred: ArrayLike,
    target: ArrayLike,
    omega1: ArrayLike,
    omega2: ArrayLike,
    eps: float = 0.1,
) -> torch.Tensor:
    """sum(W * |pred - target|) / sum(W) with W = eps + omega1 + omega2 broadcast over C."""
    pred = _t(pred)
    target = _t(target, pred)
    if pred.shape != target.shape:
        raise ShapeError(f"pred {tuple(pred.shape)} vs target {tuple(target.shape)}")
    weight = (eps + _t(omega1, pred) + _t(omega2, pred)).unsqueeze(-3).expand_as(pred)
    denom = weight.sum(dim=_CHW)
    if bool((denom <= 0).any()):
        raise DegenerateError("weighted MAE has an all-zero weight map")
    return (weight * (pred - target).abs()).sum(dim=_CHW) / denom


def dice_loss(mask_prob: ArrayLike, mask_gt: ArrayLike, smooth: float = 1.0) -> torch.Tensor:
    """1 - (2 sum(p g) + smooth) / (sum(p) + sum(g) + smooth)."""
    p = _t(mask_prob)
    g = _t(mask_gt, p)
    if p.shape != g.shape:
        raise ShapeError(f"mask_prob {tuple(p.shape)} vs gt {tuple(g.shape)}")
    inter = (p * g).sum(dim=_CHW)
    return 1.0 - (2.0 * inter + smooth) / (p.sum(dim=_CHW) + g.sum(dim=_CHW) + smooth)


def boundary_loss(mask_prob: ArrayLike, sdm: ArrayLike) -> torch.Tensor:
    """Mean over pixels of sdm * mask_prob."""
    p = _t(mask_prob)
    d = _t(sdm, p)
    if d.dim() == p.dim() - 1:
        d = d.unsqueeze(-3)
    if d.shape[-2:] != p.shape[-2:]:
        raise ShapeError(f"sdm {tuple(d.shape)} vs mask_prob {tuple(p.shape)}")
    return (p * d).mean(dim=_CHW)


# ─────────────────────────────────────────────────────────────────────────────
# Combined loss
# ─────────────────────────────────────────────────────────────────────────────


def prepare_targets(sample: SynthesisSample, cfg: LossConfig) -> SampleTargets:
    """omega1 from the target magnitude, omega2 from the three sample masks, SDM of the target."""
    omega1 = denoise_weight_map(sample.mag_target, cfg.bg_threshold)
    omega2 = myocardium_weight_map(
        [sample.mask_in[0], sample.mask_in[1], sample.mask_target[0]], cfg.dilation_px
    )
    try:
        sdm = signed_distance_map(sample.mask_target)
    except DegenerateError as ex:
        log.warning("sample %s: %s; boundary term disabled", sample.key, ex)
        sdm = np.zeros(sample.shape_hw, dtype=np.float32)
    return SampleTargets(omega1=omega1, omega2=omega2, sdm=sdm)


class Predictions(NamedTuple):
    mag: torch.Tensor
    phase: torch.Tensor
    mask_prob: torch.Tensor


class Targets(NamedTuple):
    mag: torch.Tensor
    phase: torch.Tensor
    mask: torch.Tensor
    omega1: torch.Tensor
    omega2: torch.Tensor
    sdm: torch.Tensor


def total_loss(
    preds: Predictions, targets: Targets, cfg: LossConfig
) -> tuple[torch.Tensor, LossBreakdown]:
    """w_syn * (MAE_mag + MAE_phase) + w_seg * (Dice + boundary), averaged over the batch.

    With ``cfg.weighted`` false the weight map is uniform (plain MAE).
    """
    if cfg.weighted:
        o1, o2, eps = targets.omega1, targets.omega2, cfg.background_floor
    else:
        o1 = torch.zeros_like(targets.omega1)
        o2, eps = o1, 1.0
    syn_mag = weighted_mae(preds.mag, targets.mag, o1, o2, eps).mean()
    if cfg.weight_phase:
        syn_phase = weighted_mae(preds.phase, targets.phase, o1, o2, eps).mean()
    else:
        zeros = torch.zeros_like(targets.omega1)
        syn_phase = weighted_mae(preds.phase, targets.phase, zeros, zeros, 1.0).mean()
    dice = dice_loss(preds.mask_prob, targets.mask, cfg.dice_smooth).mean()
    boundary = boundary_loss(preds.mask_prob, targets.sdm).mean()
    total = cfg.w_syn * (syn_mag + syn_phase) + cfg.w_seg * (dice + boundary)
    breakdown = LossBreakdown(
        syn_mag=float(syn_mag.detach()),
        syn_phase=float(syn_phase.detach()),
        dice=float(dice.detach()),
        boundary=float(boundary.detach()),
        total=float(total.detach()),
        w_syn=cfg.w_syn,
        w_seg=cfg.w_seg,
    )
    return total, breakdown
