"""Grayscale image / binary mask containers and PNG I/O.

Pixel layout is row-major with the origin at the top-left corner; a
pixel coordinate (x, y) indexes column x of row y.  Containers wrap
read-only numpy arrays so values can be shared without defensive
copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, ShapeMismatchError, UnsupportedImageError

__all__ = [
    "GrayImage",
    "BinaryMask",
    "load_gray_image",
    "save_gray_image",
    "load_mask",
    "save_mask",
    "resize_mask_nn",
]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single-channel raster, shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean raster, shape (height, width); True marks foreground."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(self.bits)
        if b.dtype != np.bool_:
            b = b.astype(bool)
        if b.ndim != 2 or b.size == 0:
            raise ValueError(f"mask must be a non-empty 2-D array, got shape {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def count(self) -> int:
        """Number of foreground pixels."""
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None


def _open_png(path: str) -> Image.Image:
    try:
        im = Image.open(path)
        im.load()
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"{path}: cannot decode image: {exc}") from exc
    except OSError as exc:
        raise CorruptImageError(f"{path}: truncated or unreadable image: {exc}") from exc
    if im.format != "PNG":
        raise UnsupportedImageError(f"{path}: expected PNG, got {im.format}")
    return im


def load_gray_image(path: str) -> GrayImage:
    """Read an 8-bit grayscale or 8-bit RGB PNG as a GrayImage.

    RGB input keeps the red channel only.  Other modes (palette,
    16-bit, alpha) raise UnsupportedImageError.
    """
    im = _open_png(path)
    if im.mode == "L":
        arr = np.asarray(im)
    elif im.mode == "RGB":
        arr = np.asarray(im)[:, :, 0]
    else:
        raise UnsupportedImageError(
            f"{path}: unsupported PNG mode {im.mode!r} (want L or RGB)"
        )
    return GrayImage(arr)


def save_gray_image(image: GrayImage, path: str) -> None:
    """Write an 8-bit grayscale PNG."""
    Image.fromarray(np.asarray(image.pixels), mode="L").save(path, format="PNG")


def load_mask(path: str) -> BinaryMask:
    """Read an 8-bit grayscale PNG as a mask: intensity >= 128 is foreground."""
    im = _open_png(path)
    if im.mode != "L":
        raise UnsupportedImageError(
            f"{path}: masks must be 8-bit grayscale PNG, got mode {im.mode!r}"
        )
    return BinaryMask(np.asarray(im) >= 128)


def save_mask(mask: BinaryMask, path: str) -> None:
    """Write a mask as an 8-bit grayscale PNG with foreground = 255."""
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def resize_mask_nn(mask: BinaryMask, width: int, height: int) -> BinaryMask:
    """Nearest-neighbour resample to (width, height).

    Source pixel for target column j is floor(j * src_w / dst_w), and
    likewise for rows, so the map is exact integer arithmetic and the
    identity resize returns an equal mask.
    """
    if width < 1 or height < 1:
        raise ValueError(f"target size must be positive, got {width}x{height}")
    xs = (np.arange(width) * mask.width) // width
    ys = (np.arange(height) * mask.height) // height
    return BinaryMask(mask.bits[np.ix_(ys, xs)])


def require_same_shape(a, b, what: str = "rasters") -> None:
    """Raise ShapeMismatchError unless a and b have equal (h, w)."""
    sa = (a.height, a.width)
    sb = (b.height, b.width)
    if sa != sb:
        raise ShapeMismatchError(f"{what} differ in shape: {sa} vs {sb}")
