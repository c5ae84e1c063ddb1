"""Tests for the zip checkpoint container."""

from __future__ import annotations

import json
import zipfile
from pathlib import Path

import numpy as np
import pytest
import torch

from mvmsynth.errors import (
    ChecksumError,
    ConfigMismatchError,
    MissingFileError,
    UnsupportedVersionError,
)
from mvmsynth.io.checkpoint import load_checkpoint, save_checkpoint
from mvmsynth.models.network import Checkpoint, NetworkConfig, TrainingMetadata
from mvmsynth.network.unet import MultiTaskAttentionUNet, from_checkpoint, to_checkpoint


@pytest.fixture
def ckpt(tiny_net: NetworkConfig) -> Checkpoint:
    torch.manual_seed(0)
    model = MultiTaskAttentionUNet(tiny_net)
    return to_checkpoint(model, TrainingMetadata(step=7, seed=3, loss_history=[{"total": 1.0}]))


class TestCheckpointFile:
    """Checkpoint zip container."""

    def test_round_trip(self, ckpt: Checkpoint, tmp_path: Path) -> None:
        path = save_checkpoint(ckpt, tmp_path / "m.ckpt")
        loaded = load_checkpoint(path)
        assert loaded.config == ckpt.config
        assert loaded.metadata.step == 7
        assert loaded.metadata.seed == 3
        assert set(loaded.parameters) == set(ckpt.parameters)
        for name, arr in ckpt.parameters.items():
            np.testing.assert_array_equal(loaded.parameters[name], arr)

    def test_container_layout(self, ckpt: Checkpoint, tmp_path: Path) -> None:
        path = save_checkpoint(ckpt, tmp_path / "m.ckpt")
        with zipfile.ZipFile(path) as zf:
            doc = json.loads(zf.read("checkpoint.json"))
            assert doc["version"] == "1"
            name = next(iter(doc["parameters"]))
            member = doc["parameters"][name]["file"]
            assert member == f"params/{name}.f32"
            raw = np.frombuffer(zf.read(member), dtype="<f4")
        assert raw.size == ckpt.parameters[name].size

    def test_loaded_checkpoint_builds_identical_model(
        self, ckpt: Checkpoint, tmp_path: Path
    ) -> None:
        loaded = load_checkpoint(save_checkpoint(ckpt, tmp_path / "m.ckpt"))
        model = from_checkpoint(loaded)
        for k, v in model.state_dict().items():
            np.testing.assert_array_equal(v.numpy(), ckpt.parameters[k])

    def test_requested_config_must_match(
        self, ckpt: Checkpoint, tmp_path: Path
    ) -> None:
        """Test that loading with a different network config raises ConfigMismatchError."""
        path = save_checkpoint(ckpt, tmp_path / "m.ckpt")
        other = ckpt.config.model_copy(update={"shared_bottleneck": False})
        with pytest.raises(ConfigMismatchError):
            load_checkpoint(path, other)

    def test_unknown_version(self, ckpt: Checkpoint, tmp_path: Path) -> None:
        path = save_checkpoint(ckpt, tmp_path / "m.ckpt")
        with zipfile.ZipFile(path) as zf:
            members = {n: zf.read(n) for n in zf.namelist()}
        doc = json.loads(members["checkpoint.json"])
        doc["version"] = "0"
        members["checkpoint.json"] = json.dumps(doc).encode()
        with zipfile.ZipFile(path, "w") as zf:
            for n, data in members.items():
                zf.writestr(n, data)
        with pytest.raises(UnsupportedVersionError):
            load_checkpoint(path)

    def test_tampered_parameter(self, ckpt: Checkpoint, tmp_path: Path) -> None:
        """Test that a modified parameter blob fails its checksum."""
        path = save_checkpoint(ckpt, tmp_path / "m.ckpt")
        with zipfile.ZipFile(path) as zf:
            members = {n: zf.read(n) for n in zf.namelist()}
        victim = next(n for n in members if n.startswith("params/"))
        members[victim] = bytes(len(members[victim]))
        with zipfile.ZipFile(path, "w") as zf:
            for n, data in members.items():
                zf.writestr(n, data)
        with pytest.raises(ChecksumError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(MissingFileError):
            load_checkpoint(tmp_path / "nope.ckpt")


def test_mismatched_parameters_fail_model_construction(ckpt: Checkpoint) -> None:
    wrong = ckpt.model_copy(update={"config": NetworkConfig(base_channels=8)})
    with pytest.raises(ConfigMismatchError):
        from_checkpoint(wrong)
