"""Config validation, the training loop, checkpointing, and reproducibility."""

import json

import pytest
import torch

from segmenter.infer import load_model
from segmenter.train import TrainConfig, train

from conftest import make_disk_dataset

CFG = TrainConfig(epochs=3, input_size=(64, 64))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epochs": 0},
        {"batch_size": 0},
        {"learning_rate": 0.0},
        {"learning_rate": -1e-3},
        {"momentum": -0.1},
        {"train_fraction": 0.0},
        {"train_fraction": 1.0},
        {"input_size": (321, 240)},
        {"input_size": (320, 244)},
        {"input_size": (0, 8)},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs)


@pytest.fixture(scope="module")
def run(disk_dataset, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("run") / "model.bin")
    payload = train(disk_dataset, out, CFG, seed=0)
    return out, payload


def test_log_structure(run):
    _, payload = run
    assert sorted(payload) == ["best_epoch", "best_val_iou", "epochs"]
    assert len(payload["epochs"]) == CFG.epochs
    for i, rec in enumerate(payload["epochs"], start=1):
        assert rec["epoch"] == i
        assert rec["train_loss"] > 0.0
        assert 0.0 <= rec["val_iou"] <= 1.0


def test_best_epoch_tracks_max_val_iou(run):
    _, payload = run
    ious = [rec["val_iou"] for rec in payload["epochs"]]
    assert payload["best_val_iou"] == max(ious)
    # strict improvement required, so ties keep the earliest epoch
    assert payload["best_epoch"] == ious.index(max(ious)) + 1


def test_loss_decreases(run):
    _, payload = run
    losses = [rec["train_loss"] for rec in payload["epochs"]]
    assert losses[-1] < losses[0]


def test_log_file_matches_return_value(run):
    out, payload = run
    with open(out + ".log.json", "r", encoding="utf-8") as fh:
        assert json.load(fh) == payload


def test_checkpoint_loads_with_recorded_size(run):
    out, payload = run
    model, size = load_model(out)
    assert size == (64, 64)
    assert not model.training
    raw = torch.load(out, map_location="cpu", weights_only=True)
    assert raw["val_iou"] == payload["best_val_iou"]
    assert raw["epoch"] == payload["best_epoch"]


def test_fixed_seed_reproduces_run(disk_dataset, tmp_path):
    a = train(disk_dataset, str(tmp_path / "a.bin"), CFG, seed=4)
    b = train(disk_dataset, str(tmp_path / "b.bin"), CFG, seed=4)
    assert abs(a["best_val_iou"] - b["best_val_iou"]) <= 0.02
    assert a == b
    ma, _ = load_model(str(tmp_path / "a.bin"))
    mb, _ = load_model(str(tmp_path / "b.bin"))
    for key, va in ma.state_dict().items():
        assert torch.equal(va, mb.state_dict()[key])


def test_rejects_unusable_split(tmp_path):
    root = str(tmp_path / "two")
    make_disk_dataset(root, n=2)
    with pytest.raises(ValueError):
        train(root, str(tmp_path / "m.bin"), CFG, seed=0)
