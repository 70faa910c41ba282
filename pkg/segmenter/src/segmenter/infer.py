"""Inference: predict at network resolution, threshold, clean, upscale, save.

The model checkpoint stores its training input size; each source image
is resized to that, the foreground probability is thresholded at 0.5,
the binary prediction is smoothed with a couple of 3x3 majority votes
(raw thresholding leaves single-pixel ragged boundaries and specks),
then nearest-neighbour-resized to the requested output size and written
as a 0/255 grayscale PNG.
"""

from __future__ import annotations

import os
from typing import Optional, Tuple

import numpy as np
import torch
from PIL import Image

from .data import load_image, resize_mask_nn, save_mask
from .model import ToySegNet

__all__ = ["load_model", "smooth_mask", "predict_mask", "infer_file", "infer_dir"]


def load_model(path: str) -> Tuple[ToySegNet, Tuple[int, int]]:
    """(model in eval mode, (width, height) it was trained at)."""
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
        model = ToySegNet()
        model.load_state_dict(payload["state_dict"])
        size = tuple(int(v) for v in payload["input_size"])
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"{path}: unreadable model file ({exc})") from exc
    model.eval()
    return model, size


def smooth_mask(bits: np.ndarray, passes: int = 2) -> np.ndarray:
    """Repeated 3x3 majority vote; the border is padded with background."""
    out = bits
    for _ in range(passes):
        padded = np.pad(out.astype(np.int32), 1)
        count = sum(
            padded[1 + dy : padded.shape[0] - 1 + dy,
                   1 + dx : padded.shape[1] - 1 + dx]
            for dy in (-1, 0, 1) for dx in (-1, 0, 1)
        )
        out = count >= 5
    return out


def predict_mask(model: ToySegNet, pixels: np.ndarray) -> np.ndarray:
    """Cleaned boolean prediction at network resolution for a [0,1] image."""
    x = torch.from_numpy(np.ascontiguousarray(pixels, dtype=np.float32))
    prob = model.predict_prob(x[None, None])[0]
    return smooth_mask((prob >= 0.5).numpy())


def infer_file(
    model: ToySegNet,
    net_size: Tuple[int, int],
    image_path: str,
    out_path: str,
    target_size: Optional[Tuple[int, int]] = None,
) -> np.ndarray:
    """Segment one image; target_size defaults to the source image size."""
    if target_size is None:
        with Image.open(image_path) as im:
            target_size = im.size
    pred = predict_mask(model, load_image(image_path, net_size))
    out = resize_mask_nn(pred, target_size[0], target_size[1])
    save_mask(out, out_path)
    return out


def infer_dir(
    model_path: str,
    in_dir: str,
    out_dir: str,
    target_size: Optional[Tuple[int, int]] = None,
) -> int:
    """Segment every PNG in in_dir into out_dir; returns the image count."""
    if not os.path.isdir(in_dir):
        raise FileNotFoundError(f"not a directory: {in_dir}")
    names = sorted(n for n in os.listdir(in_dir) if n.lower().endswith(".png"))
    if not names:
        raise ValueError(f"no PNG files in {in_dir}")
    model, net_size = load_model(model_path)
    os.makedirs(out_dir, exist_ok=True)
    for name in names:
        infer_file(
            model, net_size,
            os.path.join(in_dir, name),
            os.path.join(out_dir, name),
            target_size,
        )
    return len(names)
