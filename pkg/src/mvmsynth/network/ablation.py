from __future__ import annotations

from mvmsynth.models.loss import LossConfig
from mvmsynth.models.network import AblationRow, NetworkConfig


def configure_ablation(
    row: AblationRow | str,
    base_net: NetworkConfig | None = None,
    base_loss: LossConfig | None = None,
) -> tuple[NetworkConfig, LossConfig]:
    """Network and loss configuration of one ablation row.

    sep_no_shared          independent encoders/decoders, no shared bottleneck, weighted loss
    shared_no_independent  one encoder (10 ch) / one decoder (5 ch), shared bottleneck, weighted
    no_weighted_loss       full architecture, uniform loss weights
    full                   full architecture, weighted loss
    """
    row = AblationRow(row)
    net = base_net or NetworkConfig()
    loss = base_loss or LossConfig()
    independent = row != AblationRow.shared_no_independent
    shared = row != AblationRow.sep_no_shared
    weighted = row != AblationRow.no_weighted_loss
    return (
        net.model_copy(
            update={
                "independent_encoders": independent,
                "independent_decoders": independent,
                "shared_bottleneck": shared,
            }
        ),
        loss.model_copy(update={"weighted": weighted}),
    )
