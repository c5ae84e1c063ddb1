"""Tests for conv blocks, attention gates, encoders and decoders."""

from __future__ import annotations

import pytest
import torch
from torch import nn

from mvmsynth.errors import ShapeError
from mvmsynth.network.blocks import AttentionGate, ConvBlock, Decoder, Encoder, level_channels


class TestConvBlock:
    """Convolution blocks with instance normalization."""

    def test_instance_norm_statistics(self) -> None:
        """Test per-channel mean 0 and variance 1 before the affine step."""
        torch.manual_seed(0)
        block = ConvBlock(3, 8)
        x = torch.randn(2, 3, 16, 16) * 5 + 3
        normed = block.body[:2](x)
        mean = normed.mean(dim=(-2, -1))
        var = normed.var(dim=(-2, -1), unbiased=False)
        assert torch.allclose(mean, torch.zeros_like(mean), atol=1e-4)
        assert torch.allclose(var, torch.ones_like(var), atol=1e-3)

    def test_keeps_spatial_size(self) -> None:
        assert ConvBlock(2, 4)(torch.randn(1, 2, 9, 7)).shape == (1, 4, 9, 7)

    def test_leaky_activation_keeps_negative_slope(self) -> None:
        """Test that both activations are LeakyReLU with slope 0.2."""
        layers = (nn.Conv2d, nn.InstanceNorm2d)
        acts = [m for m in ConvBlock(2, 4).body if not isinstance(m, layers)]
        assert len(acts) == 2
        assert all(isinstance(a, nn.LeakyReLU) and a.negative_slope == 0.2 for a in acts)
        x = torch.tensor([[[[-1.0, 2.0]]]])
        assert torch.allclose(acts[0](x), torch.tensor([[[[-0.2, 2.0]]]]))


class TestAttentionGate:
    """Additive attention gates on skip connections."""

    def _gate(self, bias: float) -> AttentionGate:
        torch.manual_seed(0)
        gate = AttentionGate(4, 8)
        with torch.no_grad():
            gate.psi.weight.zero_()
            gate.psi.bias.fill_(bias)
        return gate

    def test_open_gate_passes_skip(self) -> None:
        x = torch.randn(1, 4, 8, 8)
        g = torch.randn(1, 8, 4, 4)
        assert torch.allclose(self._gate(50.0)(x, g), x, atol=1e-6)

    def test_closed_gate_blocks_skip(self) -> None:
        """Test that a saturated negative gate zeroes the skip features."""
        x = torch.randn(1, 4, 8, 8)
        g = torch.randn(1, 8, 4, 4)
        assert self._gate(-50.0)(x, g).abs().max() < 1e-6

    def test_coefficients_are_probabilities(self) -> None:
        torch.manual_seed(1)
        gate = AttentionGate(4, 8)
        alpha = gate.coefficients(torch.randn(2, 4, 8, 8), torch.randn(2, 8, 4, 4))
        assert alpha.shape == (2, 1, 8, 8)
        assert alpha.min() >= 0.0 and alpha.max() <= 1.0

    def test_channel_mismatch(self) -> None:
        gate = AttentionGate(4, 8)
        with pytest.raises(ShapeError):
            gate(torch.randn(1, 5, 8, 8), torch.randn(1, 8, 4, 4))
        with pytest.raises(ShapeError):
            gate(torch.randn(1, 4, 8, 8), torch.randn(1, 7, 4, 4))


def test_encoder_decoder_shapes() -> None:
    torch.manual_seed(0)
    assert level_channels(4, 4) == [4, 8, 16, 32]
    enc = Encoder(2, 4)
    skips, bottom = enc(torch.randn(1, 2, 32, 32))
    assert [s.shape[-1] for s in skips] == [32, 16, 8, 4]
    assert bottom.shape == (1, 32, 2, 2)
    dec = Decoder(3, 4, 32)
    assert dec(bottom, skips).shape == (1, 3, 32, 32)
    plain = Decoder(3, 4, 32, use_attention=False)
    assert plain(bottom, skips).shape == (1, 3, 32, 32)
