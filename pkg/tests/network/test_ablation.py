from __future__ import annotations

import pytest

from mvmsynth.models.loss import LossConfig
from mvmsynth.models.network import AblationRow, NetworkConfig
from mvmsynth.network import configure_ablation


@pytest.mark.parametrize(
    ("row", "independent", "shared", "weighted"),
    [
        ("sep_no_shared", True, False, True),
        ("shared_no_independent", False, True, True),
        ("no_weighted_loss", True, True, False),
        ("full", True, True, True),
    ],
)
def test_rows(row: str, independent: bool, shared: bool, weighted: bool) -> None:
    """Test the architecture and loss switches of each ablation row."""
    net, loss = configure_ablation(row)
    assert net.independent_encoders is independent
    assert net.independent_decoders is independent
    assert net.shared_bottleneck is shared
    assert loss.weighted is weighted


def test_base_settings_carry_over() -> None:
    """Test that base settings outside the ablation axes are kept."""
    net, loss = configure_ablation(
        AblationRow.full, NetworkConfig(base_channels=8), LossConfig(w_seg=0.5)
    )
    assert net.base_channels == 8
    assert loss.w_seg == 0.5


def test_unknown_row() -> None:
    with pytest.raises(ValueError):
        configure_ablation("bogus")
