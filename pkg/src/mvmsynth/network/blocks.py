"""Building blocks: instance-normalized conv blocks, additive attention gates,
encoders and decoders."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from mvmsynth.errors import ShapeError


class ConvBlock(nn.Module):
    """(conv3x3 -> InstanceNorm -> LeakyReLU) x 2."""

    def __init__(self, in_ch: int, out_ch: int) -> None:
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1),
            nn.InstanceNorm2d(out_ch, affine=True),
            nn.LeakyReLU(0.2),
            nn.Conv2d(out_ch, out_ch, kernel_size=3, padding=1),
            nn.InstanceNorm2d(out_ch, affine=True),
            nn.LeakyReLU(0.2),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(x)


class AttentionGate(nn.Module):
    """Additive attention gate.

    alpha(p) = sigmoid(psi(relu(W_x x(p) + W_g g(p)))), output = alpha * x.
    The gating signal ``g`` comes from the coarser decoder level and is
    bilinearly resized to the grid of ``x`` after projection.
    """

    def __init__(self, x_ch: int, g_ch: int, inter_ch: int | None = None) -> None:
        super().__init__()
        inter = inter_ch or max(1, x_ch // 2)
        self.x_ch, self.g_ch = x_ch, g_ch
        self.W_x = nn.Conv2d(x_ch, inter, kernel_size=1, bias=False)
        self.W_g = nn.Conv2d(g_ch, inter, kernel_size=1, bias=True)
        self.psi = nn.Conv2d(inter, 1, kernel_size=1, bias=True)

    def coefficients(self, x: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
        """Gate coefficients alpha, shape [B,1,H,W], values in [0,1]."""
        if x.shape[1] != self.x_ch:
            raise ShapeError(f"attention gate expects {self.x_ch} skip channels, got {x.shape[1]}")
        if g.shape[1] != self.g_ch:
            raise ShapeError(
                f"attention gate expects {self.g_ch} gating channels, got {g.shape[1]}"
            )
        gx = self.W_x(x)
        gg = self.W_g(g)
        if gg.shape[-2:] != gx.shape[-2:]:
            gg = F.interpolate(gg, size=gx.shape[-2:], mode="bilinear", align_corners=False)
        return torch.sigmoid(self.psi(F.relu(gx + gg)))

    def forward(self, x: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
        return x * self.coefficients(x, g)


def level_channels(base: int, depth: int) -> list[int]:
    return [base * 2**i for i in range(depth)]


class Encoder(nn.Module):
    """Four conv blocks with max-pooling; returns per-scale skips and the H/16 feature."""

    def __init__(self, in_ch: int, base: int, depth: int = 4) -> None:
        super().__init__()
        chans = level_channels(base, depth)
        self.out_channels = chans[-1]
        self.skip_channels = chans
        ins = [in_ch] + chans[:-1]
        self.blocks = nn.ModuleList(ConvBlock(i, o) for i, o in zip(ins, chans))
        self.pool = nn.MaxPool2d(2)

    def forward(self, x: torch.Tensor) -> tuple[list[torch.Tensor], torch.Tensor]:
        skips: list[torch.Tensor] = []
        for block in self.blocks:
            x = block(x)
            skips.append(x)
            x = self.pool(x)
        return skips, x


class Decoder(nn.Module):
    """Transposed-conv upsampling with attention-gated skips and a 1x1 output head."""

    def __init__(
        self,
        out_ch: int,
        base: int,
        bottleneck_ch: int,
        *,
        skip_mult: int = 1,
        depth: int = 4,
        use_attention: bool = True,
    ) -> None:
        super().__init__()
        chans = level_channels(base, depth)
        self.use_attention = use_attention
        self.ups = nn.ModuleList()
        self.gates = nn.ModuleList()
        self.blocks = nn.ModuleList()
        g_ch = bottleneck_ch
        for ch in reversed(chans):
            skip_ch = ch * skip_mult
            self.ups.append(nn.ConvTranspose2d(g_ch, ch, kernel_size=2, stride=2))
            self.gates.append(AttentionGate(skip_ch, g_ch) if use_attention else nn.Identity())
            self.blocks.append(ConvBlock(ch + skip_ch, ch))
            g_ch = ch
        self.head = nn.Conv2d(chans[0], out_ch, kernel_size=1)

    def forward(self, bottom: torch.Tensor, skips: list[torch.Tensor]) -> torch.Tensor:
        x = bottom
        for up, gate, block, skip in zip(self.ups, self.gates, self.blocks, reversed(skips)):
            gated = gate(skip, x) if self.use_attention else skip
            x = block(torch.cat([up(x), gated], dim=1))
        return self.head(x)
