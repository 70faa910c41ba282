"""Five-fold image augmentation: Gaussian blur at three radii plus two
edge-enhancement variants.

All filters operate in float64 on the uint8 image, replicate the edge
row/column at the borders (nearest padding), and round half up when
quantizing back to uint8, so results are reproducible bit-for-bit
against a dense convolution oracle.
"""

from __future__ import annotations

import math
from typing import List

import numpy as np
from scipy import ndimage

from .imgcore import GrayImage

__all__ = [
    "gaussian_blur",
    "edge_enhance",
    "augment_five_fold",
    "AUGMENT_SUFFIXES",
    "BLUR_RADII",
]

BLUR_RADII = (2, 3, 4)
AUGMENT_SUFFIXES = ("blur2", "blur3", "blur4", "edge1", "edge2")

# 3x3 sharpening kernels: -1 ring around a heavy center, scaled back to
# unit gain.  "standard" = (center 10)/2, "more" = (center 9)/1.
_EDGE_KERNELS = {
    "standard": np.array([[-1, -1, -1], [-1, 10, -1], [-1, -1, -1]], dtype=np.float64) / 2.0,
    "more": np.array([[-1, -1, -1], [-1, 9, -1], [-1, -1, -1]], dtype=np.float64),
}


def _quantize(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(arr + 0.5), 0, 255).astype(np.uint8)  # round half up


def gaussian_taps(radius: float) -> np.ndarray:
    """Normalized 1-D Gaussian with sigma = radius, truncated at 2 sigma."""
    if radius <= 0:
        raise ValueError(f"blur radius must be positive, got {radius}")
    t = math.ceil(2.0 * radius)
    x = np.arange(-t, t + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * radius * radius))
    return k / k.sum()


def gaussian_blur(image: GrayImage, radius: float) -> GrayImage:
    """Separable Gaussian blur with nearest-edge padding."""
    taps = gaussian_taps(radius)
    f = image.pixels.astype(np.float64)
    f = ndimage.correlate1d(f, taps, axis=0, mode="nearest")
    f = ndimage.correlate1d(f, taps, axis=1, mode="nearest")
    return GrayImage(_quantize(f))


def edge_enhance(image: GrayImage, variant: str = "standard") -> GrayImage:
    """3x3 sharpen; variant is "standard" or "more"."""
    if variant not in _EDGE_KERNELS:
        raise ValueError(f"variant must be one of {sorted(_EDGE_KERNELS)}, got {variant!r}")
    f = image.pixels.astype(np.float64)
    out = ndimage.correlate(f, _EDGE_KERNELS[variant], mode="nearest")
    return GrayImage(_quantize(out))


def augment_five_fold(image: GrayImage) -> List[GrayImage]:
    """The five augmented variants, ordered as AUGMENT_SUFFIXES."""
    return [
        gaussian_blur(image, BLUR_RADII[0]),
        gaussian_blur(image, BLUR_RADII[1]),
        gaussian_blur(image, BLUR_RADII[2]),
        edge_enhance(image, "standard"),
        edge_enhance(image, "more"),
    ]
