"""Shared fixtures: a tiny disk dataset on disk and a briefly trained model.

The unit tests train on small dark-disk-on-bright-field images so the
whole suite stays fast; the real eye imagery only appears in the
acceptance tests.
"""

import os

import numpy as np
import pytest
from PIL import Image


def render_disk(cy, cx, radius, size=64):
    """(uint8 image, bool mask) of a dark disk on a bright field."""
    yy, xx = np.mgrid[0:size, 0:size]
    inside = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius * radius
    img = np.full((size, size), 230, dtype=np.uint8)
    img[inside] = 90
    return img, inside


def write_pair(dataset_dir, stem, cy, cx, radius, size=64):
    img, bits = render_disk(cy, cx, radius, size)
    Image.fromarray(img, mode="L").save(
        os.path.join(dataset_dir, "images", stem + ".png")
    )
    Image.fromarray(np.where(bits, 255, 0).astype(np.uint8), mode="L").save(
        os.path.join(dataset_dir, "masks", stem + ".png")
    )


def make_disk_dataset(root, n=12, size=64, seed=11):
    os.makedirs(os.path.join(root, "images"))
    os.makedirs(os.path.join(root, "masks"))
    rng = np.random.default_rng(seed)
    for i in range(n):
        cy, cx = (int(v) for v in rng.integers(24, 40, size=2))
        write_pair(root, f"disk{i:02d}", cy, cx, int(rng.integers(8, 18)), size)


@pytest.fixture(scope="session")
def disk_dataset(tmp_path_factory):
    """12 64x64 disk images with exact masks."""
    root = str(tmp_path_factory.mktemp("disks"))
    make_disk_dataset(root)
    return root


@pytest.fixture(scope="session")
def tiny_model(disk_dataset, tmp_path_factory):
    """Checkpoint from a 3-epoch run at 64x64, for inference tests."""
    from segmenter.train import TrainConfig, train

    out = str(tmp_path_factory.mktemp("model") / "model.bin")
    train(disk_dataset, out, TrainConfig(epochs=3, input_size=(64, 64)), seed=0)
    return out
