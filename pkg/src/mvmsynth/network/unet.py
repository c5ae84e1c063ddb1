"""Multi-task attention UNet: magnitude / phase / mask encoders, a condition-fused
bottleneck, and magnitude / phase / mask decoders with interpolation residuals."""

from __future__ import annotations

import logging

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from mvmsynth.errors import ConfigMismatchError, NumericError, ShapeError
from mvmsynth.losses import Predictions
from mvmsynth.models.network import (
    MAG_IN,
    MAG_OUT,
    MASK_IN,
    MASK_OUT,
    PHASE_IN,
    PHASE_OUT,
    Checkpoint,
    NetworkConfig,
    TrainingMetadata,
)
from mvmsynth.models.sample import SynthesisSample
from mvmsynth.network.blocks import ConvBlock, Decoder, Encoder

log = logging.getLogger("mvmsynth.network")

THREADS: tuple[str, str, str] = ("mag", "phase", "mask")
_IN = {"mag": MAG_IN, "phase": PHASE_IN, "mask": MASK_IN}
_OUT = {"mag": MAG_OUT, "phase": PHASE_OUT, "mask": MASK_OUT}
JOINT = "joint"
CONDITION_CHANNELS = 2


class MultiTaskAttentionUNet(nn.Module):
    """Three-input, three-output attention UNet conditioned on (tau, k).

    ``independent_encoders`` / ``independent_decoders`` choose between one
    module per modality and a single module over channel-concatenated data;
    ``shared_bottleneck`` fuses all encoder features with the condition map
    into one stack that every decoder reads.
    """

    def __init__(self, config: NetworkConfig | None = None) -> None:
        super().__init__()
        self.config = cfg = config or NetworkConfig()
        b, depth = cfg.base_channels, cfg.depth
        enc_names = list(THREADS) if cfg.independent_encoders else [JOINT]
        dec_names = list(THREADS) if cfg.independent_decoders else [JOINT]
        self.enc_names, self.dec_names = enc_names, dec_names

        self.encoders = nn.ModuleDict(
            {
                n: Encoder(_IN[n] if n != JOINT else sum(_IN.values()), b, depth)
                for n in enc_names
            }
        )
        bottom_ch = b * 2 ** (depth - 1)
        neck_ch = 2 * bottom_ch
        paired = len(enc_names) == len(dec_names)
        if cfg.shared_bottleneck:
            self.fuse = nn.Conv2d(len(enc_names) * bottom_ch + CONDITION_CHANNELS, neck_ch, 1)
            self.necks = nn.ModuleDict({"shared": ConvBlock(neck_ch, neck_ch)})
        else:
            neck_in = bottom_ch if paired else len(enc_names) * bottom_ch
            self.necks = nn.ModuleDict(
                {n: ConvBlock(neck_in + CONDITION_CHANNELS, neck_ch) for n in dec_names}
            )
        skip_mult = 1 if (paired or len(enc_names) == 1) else len(enc_names)
        self.decoders = nn.ModuleDict(
            {
                n: Decoder(
                    _OUT[n] if n != JOINT else sum(_OUT.values()),
                    b,
                    neck_ch,
                    skip_mult=skip_mult,
                    depth=depth,
                    use_attention=cfg.use_attention,
                )
                for n in dec_names
            }
        )

    # ── helpers ────────────────────────────────────────────────────────────

    def _encoder_inputs(
        self, mag: torch.Tensor, phase: torch.Tensor, mask: torch.Tensor
    ) -> dict[str, torch.Tensor]:
        if self.config.independent_encoders:
            return {"mag": mag, "phase": phase, "mask": mask}
        return {JOINT: torch.cat([mag, phase, mask], dim=1)}

    def _skips_for(
        self, dec: str, skips: dict[str, list[torch.Tensor]]
    ) -> list[torch.Tensor]:
        if dec in skips:
            return skips[dec]
        if len(skips) == 1:
            return next(iter(skips.values()))
        return [torch.cat(level, dim=1) for level in zip(*(skips[n] for n in self.enc_names))]

    # ── forward ────────────────────────────────────────────────────────────

    def forward(
        self,
        mag_in: torch.Tensor,
        phase_in: torch.Tensor,
        mask_in: torch.Tensor,
        condition: torch.Tensor,
    ) -> Predictions:
        H, W = mag_in.shape[-2:]
        r = self.config.reduction
        if H % r or W % r:
            raise ShapeError(f"H and W must be divisible by {r}, got {H}x{W}")

        skips: dict[str, list[torch.Tensor]] = {}
        bottoms: dict[str, torch.Tensor] = {}
        for name, x in self._encoder_inputs(mag_in, phase_in, mask_in).items():
            skips[name], bottoms[name] = self.encoders[name](x)
        size = next(iter(bottoms.values())).shape[-2:]
        cond = condition
        if cond.shape[-2:] != size:
            cond = F.interpolate(cond, size=size, mode="bilinear", align_corners=False)

        outputs: dict[str, torch.Tensor] = {}
        if self.config.shared_bottleneck:
            fused = self.fuse(torch.cat([bottoms[n] for n in self.enc_names] + [cond], dim=1))
            shared = self.necks["shared"](fused)
            for dec in self.dec_names:
                outputs[dec] = self.decoders[dec](shared, self._skips_for(dec, skips))
        else:
            for dec in self.dec_names:
                feats = (
                    bottoms[dec]
                    if dec in bottoms
                    else torch.cat([bottoms[n] for n in self.enc_names], dim=1)
                )
                neck = self.necks[dec](torch.cat([feats, cond], dim=1))
                outputs[dec] = self.decoders[dec](neck, self._skips_for(dec, skips))

        if JOINT in outputs:
            mag_d, phase_d, mask_logit = torch.split(
                outputs[JOINT], [MAG_OUT, PHASE_OUT, MASK_OUT], dim=1
            )
        else:
            mag_d, phase_d, mask_logit = outputs["mag"], outputs["phase"], outputs["mask"]

        # condition channel 1 carries k/4, the interpolation weight
        t = condition[:, 1:2, :1, :1]
        base_mag = (1.0 - t) * mag_in[:, 0:1] + t * mag_in[:, 1:2]
        base_phase = (1.0 - t) * phase_in[:, 0:3] + t * phase_in[:, 3:6]
        return Predictions(
            mag=torch.clamp(base_mag + torch.tanh(mag_d), 0.0, 1.0),
            phase=torch.clamp(base_phase + torch.tanh(phase_d), -1.0, 1.0),
            mask_prob=torch.sigmoid(mask_logit),
        )

    # ── utilities ──────────────────────────────────────────────────────────

    def synthesis_heads(self) -> list[tuple[nn.Conv2d, slice]]:
        """Final 1x1 convolutions (and output rows) producing magnitude / phase residuals."""
        if JOINT in self.decoders:
            return [(self.decoders[JOINT].head, slice(0, MAG_OUT + PHASE_OUT))]
        return [
            (self.decoders["mag"].head, slice(None)),
            (self.decoders["phase"].head, slice(None)),
        ]

    @torch.no_grad()
    def zero_synthesis_heads(self) -> None:
        """Make magnitude / phase outputs equal the anchor interpolation exactly."""
        for head, rows in self.synthesis_heads():
            head.weight[rows].zero_()
            if head.bias is not None:
                head.bias[rows].zero_()

    def assert_finite(self) -> None:
        for name, p in self.named_parameters():
            if not torch.isfinite(p).all():
                raise NumericError(f"parameter '{name}' contains NaN or Inf")


# ─────────────────────────────────────────────────────────────────────────────
# Checkpoint conversion
# ─────────────────────────────────────────────────────────────────────────────


def to_checkpoint(
    model: MultiTaskAttentionUNet, metadata: TrainingMetadata | None = None
) -> Checkpoint:
    params = {
        k: v.detach().cpu().numpy().astype(np.float32).copy()
        for k, v in model.state_dict().items()
    }
    return Checkpoint(
        config=model.config, parameters=params, metadata=metadata or TrainingMetadata()
    )


def from_checkpoint(ckpt: Checkpoint, device: str | torch.device = "cpu") -> MultiTaskAttentionUNet:
    model = MultiTaskAttentionUNet(ckpt.config)
    expected = model.state_dict()
    missing = set(expected) - set(ckpt.parameters)
    unexpected = set(ckpt.parameters) - set(expected)
    if missing or unexpected:
        raise ConfigMismatchError(
            f"checkpoint does not match config: missing={sorted(missing)[:5]} "
            f"unexpected={sorted(unexpected)[:5]}"
        )
    state = {}
    for name, ref in expected.items():
        arr = ckpt.parameters[name]
        if tuple(arr.shape) != tuple(ref.shape):
            raise ConfigMismatchError(
                f"parameter '{name}' has shape {arr.shape}, config needs {tuple(ref.shape)}"
            )
        state[name] = torch.from_numpy(np.asarray(arr, dtype=np.float32).copy())
    model.load_state_dict(state)
    return model.to(device)


# ─────────────────────────────────────────────────────────────────────────────
# Sample-level inference
# ─────────────────────────────────────────────────────────────────────────────


def sample_tensors(
    sample: SynthesisSample, device: str | torch.device = "cpu", dtype: torch.dtype = torch.float32
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """Model inputs with a leading batch axis of one."""

    def _b(a: np.ndarray) -> torch.Tensor:
        return torch.as_tensor(np.asarray(a), dtype=dtype, device=device).unsqueeze(0)

    return _b(sample.mag_in), _b(sample.phase_in), _b(sample.mask_in), _b(sample.condition.values)


def forward(
    sample: SynthesisSample, model: MultiTaskAttentionUNet | Checkpoint
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Predict (mag [1,H,W], phase [3,H,W], mask_prob [1,H,W]) for one sample."""
    net = from_checkpoint(model) if isinstance(model, Checkpoint) else model
    net.assert_finite()
    H, W = sample.shape_hw
    r = net.config.reduction
    if H % r or W % r:
        raise ShapeError(f"H and W must be divisible by {r}, got {H}x{W}")
    param = next(net.parameters())
    was_training = net.training
    net.eval()
    try:
        with torch.no_grad():
            out = net(*sample_tensors(sample, param.device, param.dtype))
    finally:
        net.train(was_training)
    mag, phase, mask = (x[0].detach().cpu().numpy().astype(np.float32) for x in out)
    if not (np.isfinite(mag).all() and np.isfinite(phase).all() and np.isfinite(mask).all()):
        raise NumericError(f"non-finite network output for sample {sample.key}")
    return mag, phase, mask


def predict_sample(
    model: MultiTaskAttentionUNet, sample: SynthesisSample
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Numpy-in / numpy-out inference for one sample, no gradient tracking."""
    return forward(sample, model)
