"""Multi-head multi-tail attention UNet."""

from .ablation import configure_ablation
from .blocks import AttentionGate, ConvBlock, Decoder, Encoder
from .unet import (
    MultiTaskAttentionUNet,
    forward,
    from_checkpoint,
    predict_sample,
    to_checkpoint,
)

__all__ = [
    "AttentionGate",
    "ConvBlock",
    "Decoder",
    "Encoder",
    "MultiTaskAttentionUNet",
    "configure_ablation",
    "forward",
    "from_checkpoint",
    "predict_sample",
    "to_checkpoint",
]
