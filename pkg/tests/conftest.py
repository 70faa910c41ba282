"""Shared fixtures and independent oracle helpers.

Oracles here deliberately avoid the library's own code paths: masks are
rendered from analytic geometry, convolutions run dense with explicit
index arithmetic, and PNG fixtures are written straight through PIL.
"""

import math

import numpy as np
import pytest
from hypothesis import settings
from PIL import Image

from irisforge import BinaryMask, GrayImage
from irisforge.circlefit import Circle, IrisBoundaries

settings.register_profile("ci", deadline=None, max_examples=50)
settings.load_profile("ci")


# ---------------------------------------------------------------------------
# geometry rendering (independent of irisforge.synth)

def disk_mask(w: int, h: int, cx: float, cy: float, r: float) -> np.ndarray:
    xs = np.arange(w)[None, :]
    ys = np.arange(h)[:, None]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def annulus_mask(
    w: int, h: int, cx: float, cy: float, r_in: float, r_out: float, y_cut: float = None
) -> np.ndarray:
    m = disk_mask(w, h, cx, cy, r_out) & ~disk_mask(w, h, cx, cy, r_in)
    if y_cut is not None:
        m &= (np.arange(h)[:, None] >= y_cut)
    return m


def smooth_field_image(
    w: int,
    h: int,
    cx: float,
    cy: float,
    r_p: float,
    r_i: float,
    rotation: float,
    seed: int,
    n_components: int = 12,
    max_angular_freq: int = 12,
) -> GrayImage:
    """Band-limited full-frame field in polar coordinates about (cx, cy).

    Rotating the source by `rotation` shifts the field angularly and
    nothing else, which makes it the oracle for rotation-equivariance
    tests without the step edges a rendered eye has.
    """
    rng = np.random.default_rng(seed)
    m = rng.integers(3, max_angular_freq + 1, n_components)
    q = rng.integers(0, 4, n_components)
    ph = rng.uniform(0, 2 * np.pi, n_components)
    a = rng.uniform(0.5, 1.0, n_components)
    xs = np.arange(w)[None, :] - cx
    ys = cy - np.arange(h)[:, None]
    phi = np.arctan2(ys, xs)
    rho = (np.hypot(xs, ys) - r_p) / (r_i - r_p)  # unclipped: smooth everywhere
    f = sum(
        a[k] * np.sin(m[k] * (phi - rotation) + 2 * np.pi * q[k] * rho + ph[k])
        for k in range(n_components)
    )
    return GrayImage(np.clip(np.rint(128 + 45 * f / a.sum()), 0, 255).astype(np.uint8))


@pytest.fixture
def concentric_bounds():
    return IrisBoundaries(pupil=Circle(160.0, 120.0, 40.0), iris=Circle(160.0, 120.0, 95.0))


# ---------------------------------------------------------------------------
# dense convolution oracle (independent of scipy.ndimage)

def dense_filter_oracle(pixels: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Correlation with edge-clamped padding, plain index arithmetic."""
    kh, kw = kernel.shape
    h, w = pixels.shape
    src = pixels.astype(np.float64)
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(kh):
                sy = min(max(y + i - kh // 2, 0), h - 1)
                for j in range(kw):
                    sx = min(max(x + j - kw // 2, 0), w - 1)
                    acc += kernel[i, j] * src[sy, sx]
            out[y, x] = acc
    return out


def quantize_half_up(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(arr + 0.5), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# encoder response oracle (explicit wrap/clamp indexing, no padding tricks)

def encode_response_oracle(texture, valid, kernel_part, rows_step, cols_step):
    """Per-application-point correlation and valid-support fractions."""
    nr, na = texture.shape
    kh, kw = kernel_part.shape
    rows = range(0, nr, rows_step)
    cols = range(0, na, cols_step)
    resp = np.zeros((len(rows), len(cols)))
    frac = np.zeros((len(rows), len(cols)))
    for ri, r in enumerate(rows):
        for ci, c in enumerate(cols):
            acc = 0.0
            nvalid = 0
            for i in range(kh):
                sr = min(max(r + i - kh // 2, 0), nr - 1)  # radial clamp
                for j in range(kw):
                    sc = (c + j - kw // 2) % na  # angular wrap
                    acc += kernel_part[i, j] * texture[sr, sc]
                    nvalid += bool(valid[sr, sc])
            resp[ri, ci] = acc
            frac[ri, ci] = nvalid / (kh * kw)
    return resp, frac


# ---------------------------------------------------------------------------
# PNG fixtures written directly with PIL

def write_png_gray(path, arr: np.ndarray) -> None:
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="L").save(path, format="PNG")


def write_png_rgb(path, arr: np.ndarray) -> None:
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="RGB").save(path, format="PNG")


def random_mask(rng: np.random.Generator, h: int, w: int, p: float = 0.5) -> BinaryMask:
    return BinaryMask(rng.random((h, w)) < p)
