"""Dataset loading for segmentation training.

Expects the directory layout images/*.png + masks/*.png with matching
stems.  Images are 8-bit grayscale; masks threshold at 128.  Everything
is resized to the configured input size up front (bilinear for images,
nearest for masks) and kept in memory as tensors — the toy datasets
this trains on are small.
"""

from __future__ import annotations

import os
from typing import List, Tuple

import numpy as np
import torch
from PIL import Image


def _png_stems(directory: str) -> dict:
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"not a directory: {directory}")
    return {
        os.path.splitext(name)[0]: os.path.join(directory, name)
        for name in os.listdir(directory)
        if name.lower().endswith(".png")
    }


def load_image(path: str, size: Tuple[int, int]) -> np.ndarray:
    """Grayscale image resized to (width, height), scaled to [0, 1]."""
    with Image.open(path) as im:
        im.load()
        if im.mode != "L":
            im = im.convert("L")
        if im.size != size:
            im = im.resize(size, Image.BILINEAR)
        return np.asarray(im, dtype=np.float32) / 255.0


def load_mask(path: str, size: Tuple[int, int]) -> np.ndarray:
    """Boolean mask resized to (width, height) with nearest neighbour."""
    with Image.open(path) as im:
        im.load()
        if im.mode != "L":
            raise ValueError(f"{path}: masks must be 8-bit grayscale PNG")
        if im.size != size:
            im = im.resize(size, Image.NEAREST)
        return np.asarray(im) >= 128


def save_mask(bits: np.ndarray, path: str) -> None:
    """Write a boolean mask as a 0/255 grayscale PNG."""
    Image.fromarray(np.where(bits, 255, 0).astype(np.uint8), mode="L").save(
        path, format="PNG"
    )


def resize_mask_nn(bits: np.ndarray, width: int, height: int) -> np.ndarray:
    """Nearest-neighbour resize by integer index mapping (deterministic)."""
    if width < 1 or height < 1:
        raise ValueError(f"target size must be positive, got {width}x{height}")
    h, w = bits.shape
    ys = (np.arange(height) * h) // height
    xs = (np.arange(width) * w) // width
    return bits[np.ix_(ys, xs)]


def load_dataset(
    dataset_dir: str, size: Tuple[int, int]
) -> Tuple[List[str], torch.Tensor, torch.Tensor]:
    """(stems, images (N,1,H,W) float32, masks (N,H,W) int64) for training."""
    images = _png_stems(os.path.join(dataset_dir, "images"))
    masks = _png_stems(os.path.join(dataset_dir, "masks"))
    stems = sorted(set(images) & set(masks))
    if not stems:
        raise ValueError(f"{dataset_dir}: no image/mask pairs with common stems")
    xs, ys = [], []
    for stem in stems:
        xs.append(load_image(images[stem], size))
        ys.append(load_mask(masks[stem], size))
    x = torch.from_numpy(np.stack(xs)).unsqueeze(1)
    y = torch.from_numpy(np.stack(ys)).to(torch.int64)
    return stems, x, y
