"""Rubber-sheet mapping of the iris annulus onto a polar rectangle.

Column j samples angle theta = 2*pi*j/n_angular (theta=0 on the +x
axis, counterclockwise with y up); row i samples the dimensionless
radial position rho = (i + 0.5)/n_radial between the pupil circle
(rho=0) and the iris circle (rho=1).  Texture is sampled bilinearly,
the mask by nearest neighbour, and samples that leave the image frame
are marked invalid rather than read.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circlefit import IrisBoundaries
from .imgcore import BinaryMask, GrayImage, require_same_shape, save_gray_image, save_mask

__all__ = ["NormalizedIris", "rubber_sheet", "rotate_normalized", "save_normalized"]


@dataclass(frozen=True, eq=False)
class NormalizedIris:
    """Polar-rectangle iris texture plus projected validity mask."""

    texture: np.ndarray  # float64, (n_radial, n_angular), values in [0, 255]
    valid: np.ndarray  # bool, same shape

    def __post_init__(self):
        tex = np.ascontiguousarray(self.texture, dtype=np.float64)
        val = np.ascontiguousarray(self.valid)
        if val.dtype != np.bool_:
            val = val.astype(bool)
        if tex.ndim != 2 or tex.size == 0:
            raise ValueError(f"texture must be non-empty 2-D, got shape {tex.shape}")
        if tex.shape != val.shape:
            raise ValueError(f"texture {tex.shape} and valid {val.shape} shapes differ")
        if tex.min() < 0 or tex.max() > 255:
            raise ValueError("texture values must lie in [0, 255]")
        tex.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "texture", tex)
        object.__setattr__(self, "valid", val)

    @property
    def n_radial(self) -> int:
        return self.texture.shape[0]

    @property
    def n_angular(self) -> int:
        return self.texture.shape[1]

    def __eq__(self, other):
        if not isinstance(other, NormalizedIris):
            return NotImplemented
        return np.array_equal(self.texture, other.texture) and np.array_equal(
            self.valid, other.valid
        )

    __hash__ = None


def rubber_sheet(
    image: GrayImage,
    mask: BinaryMask,
    bounds: IrisBoundaries,
    n_radial: int = 64,
    n_angular: int = 512,
) -> NormalizedIris:
    """Unwrap the annulus between the pupil and iris circles.

    The source point for cell (i, j) is the linear blend
    (1-rho)*C_pupil(theta) + rho*C_iris(theta) of the two circle points
    at theta, which supports non-concentric circles.
    """
    require_same_shape(image, mask, "image and mask")
    if n_radial < 1 or n_angular < 1:
        raise ValueError(f"normalized size must be positive, got {n_radial}x{n_angular}")
    h, w = image.pixels.shape

    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    ux, uy = np.cos(theta), np.sin(theta)
    # points at theta on each circle (y grows downward, hence the minus)
    pxp = bounds.pupil.cx + bounds.pupil.r * ux
    pyp = bounds.pupil.cy - bounds.pupil.r * uy
    pxi = bounds.iris.cx + bounds.iris.r * ux
    pyi = bounds.iris.cy - bounds.iris.r * uy

    rho = ((np.arange(n_radial) + 0.5) / n_radial)[:, None]
    X = (1.0 - rho) * pxp[None, :] + rho * pxi[None, :]
    Y = (1.0 - rho) * pyp[None, :] + rho * pyi[None, :]

    inside = (X >= 0) & (X <= w - 1) & (Y >= 0) & (Y <= h - 1)
    Xc = np.clip(X, 0, w - 1)
    Yc = np.clip(Y, 0, h - 1)

    x0 = np.clip(np.floor(Xc).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(Yc).astype(np.int64), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = Xc - x0
    fy = Yc - y0
    px = image.pixels.astype(np.float64)
    tex = (1 - fy) * ((1 - fx) * px[y0, x0] + fx * px[y0, x1]) + fy * (
        (1 - fx) * px[y1, x0] + fx * px[y1, x1]
    )
    tex = np.clip(tex, 0.0, 255.0)  # guard float dust at the range edges

    xn = np.rint(Xc).astype(np.int64)
    yn = np.rint(Yc).astype(np.int64)
    valid = inside & mask.bits[yn, xn]
    return NormalizedIris(texture=tex, valid=valid)


def rotate_normalized(n: NormalizedIris, shift: int) -> NormalizedIris:
    """Circularly shift texture and validity along the angular axis."""
    return NormalizedIris(
        texture=np.roll(n.texture, shift, axis=1),
        valid=np.roll(n.valid, shift, axis=1),
    )


def save_normalized(n: NormalizedIris, out_prefix: str) -> None:
    """Write <prefix>_tex.png (8-bit rounded texture) and <prefix>_valid.png."""
    tex8 = np.clip(np.rint(n.texture), 0, 255).astype(np.uint8)
    save_gray_image(GrayImage(tex8), out_prefix + "_tex.png")
    save_mask(BinaryMask(n.valid), out_prefix + "_valid.png")
