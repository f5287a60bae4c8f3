"""Raster primitives on 8-bit images.

Images are plain numpy ``uint8`` arrays, ``(H, W)`` for single channel or
``(H, W, 3)`` for RGB. Every function returns a new array and leaves its input
untouched.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage

from .errors import (
    DegenerateHistogram,
    InvalidParams,
    OutOfBounds,
    WrongChannelCount,
)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise TypeError(f"expected uint8 pixels, got {img.dtype}")
    if img.ndim == 2:
        pass
    elif img.ndim == 3 and img.shape[2] == 3:
        pass
    else:
        raise WrongChannelCount(f"unsupported image shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must have positive width and height")
    return img


def channels(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


@dataclass(frozen=True)
class CropRect:
    """Half-open pixel rectangle: columns [x0, x1), rows [y0, y1)."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self):
        if not (0 <= self.x0 < self.x1 and 0 <= self.y0 < self.y1):
            raise OutOfBounds(f"malformed rectangle {self}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    def fits(self, width: int, height: int) -> bool:
        return self.x1 <= width and self.y1 <= height

    def scaled(self, s: float) -> "CropRect":
        return CropRect(*(int(round(v * s)) for v in (self.x0, self.x1, self.y0, self.y1)))


def crop(img: np.ndarray, r: CropRect) -> np.ndarray:
    img = check_image(img)
    h, w = img.shape[:2]
    if not r.fits(w, h):
        raise OutOfBounds(f"{r} exceeds image of size {w}x{h}")
    return img[r.y0:r.y1, r.x0:r.x1].copy()


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half-up."""
    img = check_image(img)
    if channels(img) != 3:
        raise WrongChannelCount("to_grayscale needs a 3-channel image")
    f = img.astype(np.float64)
    luma = LUMA_WEIGHTS[0] * f[..., 0] + LUMA_WEIGHTS[1] * f[..., 1] + LUMA_WEIGHTS[2] * f[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def gray_to_rgb(img: np.ndarray) -> np.ndarray:
    img = check_image(img)
    if img.ndim == 3:
        return img.copy()
    return np.repeat(img[:, :, None], 3, axis=2)


# ---------------------------------------------------------------------------
# bilateral filter

def window_offsets(d: int) -> tuple[int, int]:
    """Inclusive offset range of a diameter-``d`` square window.

    Odd d is centered; even d leans one pixel toward negative offsets
    (d=30 gives -15..14).
    """
    lo = -(d // 2)
    return lo, lo + d - 1


def spatial_weights(d: int, sigma_space: float) -> np.ndarray:
    lo, hi = window_offsets(d)
    k = 2.0 * sigma_space * sigma_space
    return np.array(
        [[math.exp(-(dx * dx + dy * dy) / k) for dx in range(lo, hi + 1)]
         for dy in range(lo, hi + 1)],
        dtype=np.float64,
    )


@numba.njit(cache=True, boundscheck=False, fastmath=True)
def _bilateral_gray(img, lo, hi, spatial, lut):
    # lut is indexed by (neighbor - center + 255)
    h, w = img.shape
    d = hi - lo + 1
    flat = img.ravel()
    sflat = spatial.ravel()
    out = np.empty((h, w), np.uint8)
    for y in range(h):
        y0 = max(0, y + lo)
        y1 = min(h, y + hi + 1)
        for x in range(w):
            x0 = max(0, x + lo)
            x1 = min(w, x + hi + 1)
            c = flat[y * w + x] - 255
            n = x1 - x0
            num = 0.0
            den = 0.0
            for yy in range(y0, y1):
                ib = yy * w + x0
                sb = (yy - y - lo) * d + (x0 - x - lo)
                for k in range(n):
                    v = flat[ib + k]
                    wgt = sflat[sb + k] * lut[v - c]
                    num += wgt * v
                    den += wgt
            out[y, x] = min(255, int(math.floor(num / den + 0.5)))
    return out


@numba.njit(cache=True, boundscheck=False, fastmath=True)
def _bilateral_rgb(img, lo, hi, spatial, lut):
    # lut is indexed by squared RGB distance
    h, w, _ = img.shape
    d = hi - lo + 1
    flat = img.ravel()
    sflat = spatial.ravel()
    out = np.empty((h, w, 3), np.uint8)
    for y in range(h):
        y0 = max(0, y + lo)
        y1 = min(h, y + hi + 1)
        for x in range(w):
            x0 = max(0, x + lo)
            x1 = min(w, x + hi + 1)
            ci = (y * w + x) * 3
            cr = flat[ci]
            cg = flat[ci + 1]
            cb = flat[ci + 2]
            n = x1 - x0
            nr = 0.0
            ng = 0.0
            nb = 0.0
            den = 0.0
            for yy in range(y0, y1):
                ib = (yy * w + x0) * 3
                sb = (yy - y - lo) * d + (x0 - x - lo)
                for k in range(n):
                    r = flat[ib + 3 * k]
                    g = flat[ib + 3 * k + 1]
                    b = flat[ib + 3 * k + 2]
                    dist2 = (r - cr) * (r - cr) + (g - cg) * (g - cg) + (b - cb) * (b - cb)
                    wgt = sflat[sb + k] * lut[dist2]
                    nr += wgt * r
                    ng += wgt * g
                    nb += wgt * b
                    den += wgt
            out[y, x, 0] = min(255, int(math.floor(nr / den + 0.5)))
            out[y, x, 1] = min(255, int(math.floor(ng / den + 0.5)))
            out[y, x, 2] = min(255, int(math.floor(nb / den + 0.5)))
    return out


def bilateral_filter(img: np.ndarray, d: int = 30, sigma_color: float = 100.0,
                     sigma_space: float = 100.0) -> np.ndarray:
    """Edge-preserving smoothing with a Gaussian domain and range kernel.

    Each output pixel is the weighted mean of its ``d x d`` neighborhood with
    weight ``exp(-|q-p|^2 / 2 sigma_space^2) * exp(-|I(q)-I(p)|^2 / 2 sigma_color^2)``.
    Neighbors falling outside the image are dropped. RGB images are filtered
    jointly, using Euclidean color distance.
    """
    img = check_image(img)
    if d < 1 or sigma_color <= 0 or sigma_space <= 0:
        raise InvalidParams(f"bad bilateral params d={d} sigma_color={sigma_color} "
                            f"sigma_space={sigma_space}")
    lo, hi = window_offsets(d)
    spatial = spatial_weights(d, sigma_space)
    data = np.ascontiguousarray(img, dtype=np.int32)
    if img.ndim == 2:
        return _bilateral_gray(data, lo, hi, spatial, _range_lut(float(sigma_color), False))
    return _bilateral_rgb(data, lo, hi, spatial, _range_lut(float(sigma_color), True))


@functools.lru_cache(maxsize=8)
def _range_lut(sigma_color: float, rgb: bool) -> np.ndarray:
    k = 2.0 * sigma_color * sigma_color
    if rgb:
        lut = np.array([math.exp(-v / k) for v in range(3 * 255 * 255 + 1)])
    else:
        lut = np.array([math.exp(-(v * v) / k) for v in range(-255, 256)])
    lut.flags.writeable = False
    return lut


# ---------------------------------------------------------------------------
# thresholding

def between_class_variance(hist: np.ndarray) -> np.ndarray:
    """sigma_b^2(t) for every t, splitting into {<= t} and {> t}."""
    hist = np.asarray(hist, dtype=np.int64)
    levels = np.arange(hist.size, dtype=np.int64)
    n0 = np.cumsum(hist)
    s0 = np.cumsum(hist * levels)
    n, s = n0[-1], s0[-1]
    n1, s1 = n - n0, s - s0
    var = np.zeros(hist.size, dtype=np.float64)
    ok = (n0 > 0) & (n1 > 0)
    mu0 = s0[ok] / n0[ok]
    mu1 = s1[ok] / n1[ok]
    var[ok] = (n0[ok] / n) * (n1[ok] / n) * (mu0 - mu1) ** 2
    return var


def otsu_threshold(img: np.ndarray) -> int:
    """Threshold maximizing between-class variance; ties go to the smallest t.

    A constant image has no meaningful split: its value is returned and a
    :class:`DegenerateHistogram` warning is emitted.
    """
    img = check_image(img)
    if img.ndim != 2:
        raise WrongChannelCount("otsu_threshold needs a single-channel image")
    hist = np.bincount(img.ravel(), minlength=256)
    if np.count_nonzero(hist) == 1:
        t = int(np.flatnonzero(hist)[0])
        warnings.warn(f"constant image (value {t}); Otsu split undefined",
                      DegenerateHistogram, stacklevel=2)
        return t
    var = between_class_variance(hist)
    # exact-argmax on floats: near-equal maxima are resolved by tolerance
    best = var.max()
    return int(np.flatnonzero(var >= best - 1e-9 * max(best, 1.0))[0])


def threshold_to_zero(img: np.ndarray, t: int) -> np.ndarray:
    img = check_image(img)
    if img.ndim != 2:
        raise WrongChannelCount("threshold_to_zero needs a single-channel image")
    if not 0 <= t <= 255:
        raise InvalidParams(f"threshold {t} outside [0, 255]")
    out = img.copy()
    out[img <= t] = 0
    return out


# ---------------------------------------------------------------------------
# Canny

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()


def gaussian_kernel(size: int = 5, sigma: float = 1.4) -> np.ndarray:
    r = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(r ** 2) / (2 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def correlate2d(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-size 2D correlation with mirrored borders (edge pixel not repeated)."""
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    a = np.asarray(img, dtype=np.float64)
    mode = "reflect" if min(a.shape) > max(ph, pw) else "edge"
    padded = np.pad(a, ((ph, ph), (pw, pw)), mode=mode)
    out = np.zeros_like(a)
    h, w = a.shape
    for i in range(kh):
        for j in range(kw):
            if kernel[i, j] != 0:
                out += kernel[i, j] * padded[i:i + h, j:j + w]
    return out


def gradients(img: np.ndarray, smooth: bool = True) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(img, dtype=np.float64)
    if smooth:
        a = correlate2d(a, gaussian_kernel())
    return correlate2d(a, SOBEL_X), correlate2d(a, SOBEL_Y)


def non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep pixels that peak along their quantized gradient direction.

    A pixel must be strictly larger than its backward neighbor and at least as
    large as its forward one, so a symmetric two-pixel ridge keeps one pixel.
    """
    h, w = mag.shape
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = np.zeros(mag.shape, dtype=np.int8)  # 0: horizontal gradient
    sector[(angle >= 22.5) & (angle < 67.5)] = 1
    sector[(angle >= 67.5) & (angle < 112.5)] = 2
    sector[(angle >= 112.5) & (angle < 157.5)] = 3

    p = np.pad(mag, 1, mode="constant")
    c = (slice(1, h + 1), slice(1, w + 1))

    def shifted(dy, dx):
        return p[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx]

    # (backward, forward) neighbor offsets along the gradient, y down
    steps = {0: ((0, -1), (0, 1)), 1: ((-1, -1), (1, 1)), 2: ((-1, 0), (1, 0)), 3: ((-1, 1), (1, -1))}
    keep = np.zeros(mag.shape, dtype=bool)
    centre = p[c]
    for s, (back, fwd) in steps.items():
        ok = (centre > shifted(*back)) & (centre >= shifted(*fwd))
        keep |= ok & (sector == s)
    return np.where(keep, mag, 0.0)


EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def hysteresis(nms: np.ndarray, low: float, high: float) -> np.ndarray:
    candidates = nms > low
    labels, n = ndimage.label(candidates, structure=EIGHT_CONNECTED)
    if n == 0:
        return np.zeros(nms.shape, dtype=bool)
    strong = np.unique(labels[nms > high])
    strong = strong[strong > 0]
    return np.isin(labels, strong)


def canny(img: np.ndarray, low: float = 50.0, high: float = 150.0) -> np.ndarray:
    """Binary edge map (0/255) on a single-channel image.

    5x5 Gaussian (sigma 1.4), Sobel gradients with L2 magnitude, non-maximum
    suppression in four directions, then hysteresis over 8-connected runs.
    """
    img = check_image(img)
    if img.ndim != 2:
        raise WrongChannelCount("canny needs a single-channel image")
    if not 0 <= low <= high:
        raise InvalidParams(f"need 0 <= low <= high, got {low}, {high}")
    gx, gy = gradients(img)
    mag = np.hypot(gx, gy)
    edges = hysteresis(non_maximum_suppression(mag, gx, gy), low, high)
    return np.where(edges, 255, 0).astype(np.uint8)
