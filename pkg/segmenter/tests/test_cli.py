"""Command-line behaviour: exit codes, flag plumbing, output layout."""

import os

import numpy as np
import pytest
from PIL import Image

from segmenter.cli import main

from conftest import make_disk_dataset


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """Dataset + checkpoint produced through the CLI itself."""
    root = tmp_path_factory.mktemp("cli")
    ds = str(root / "ds")
    make_disk_dataset(ds)
    model = str(root / "model.bin")
    rc = main([
        "train", "--data", ds, "--out", model,
        "--epochs", "2", "--input-size", "64x64",
    ])
    assert rc == 0
    return ds, model


def test_train_writes_checkpoint_and_log(trained, capsys):
    _, model = trained
    assert os.path.exists(model)
    assert os.path.exists(model + ".log.json")


def test_train_missing_dataset(tmp_path):
    rc = main(["train", "--data", str(tmp_path / "nope"),
               "--out", str(tmp_path / "m.bin")])
    assert rc == 3


def test_train_bad_fraction(trained, tmp_path):
    ds, _ = trained
    rc = main(["train", "--data", ds, "--out", str(tmp_path / "m.bin"),
               "--train-fraction", "1.5"])
    assert rc == 2


def test_train_bad_input_size(trained, tmp_path):
    ds, _ = trained
    rc = main(["train", "--data", ds, "--out", str(tmp_path / "m.bin"),
               "--input-size", "100x100"])
    assert rc == 2


def test_infer_writes_masks(trained, tmp_path, capsys):
    ds, model = trained
    out = str(tmp_path / "pred")
    rc = main(["infer", "--model", model,
               "--in", os.path.join(ds, "images"), "--out", out])
    assert rc == 0
    assert "wrote 12 masks" in capsys.readouterr().out
    names = sorted(os.listdir(out))
    assert len(names) == 12
    with Image.open(os.path.join(out, names[0])) as im:
        assert im.mode == "L" and im.size == (64, 64)
        assert set(np.asarray(im).ravel().tolist()) <= {0, 255}


def test_infer_size_flag(trained, tmp_path):
    ds, model = trained
    out = str(tmp_path / "pred")
    rc = main(["infer", "--model", model,
               "--in", os.path.join(ds, "images"), "--out", out,
               "--size", "640x480"])
    assert rc == 0
    with Image.open(os.path.join(out, "disk00.png")) as im:
        assert im.size == (640, 480)


def test_infer_missing_model(trained, tmp_path):
    ds, _ = trained
    rc = main(["infer", "--model", str(tmp_path / "nope.bin"),
               "--in", os.path.join(ds, "images"), "--out", str(tmp_path / "o")])
    assert rc == 3


def test_infer_empty_dir(trained, tmp_path):
    _, model = trained
    (tmp_path / "empty").mkdir()
    rc = main(["infer", "--model", model, "--in", str(tmp_path / "empty"),
               "--out", str(tmp_path / "o")])
    assert rc == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["train", "--data", "x"],  # --out missing
        ["infer", "--model", "m", "--in", "a", "--out", "b", "--size", "640"],
    ],
)
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 2
