"""Canny edge detection built from scratch, plus the Manhattan chamfer transform."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .raster import EdgeMap, GrayImage


@dataclass(frozen=True)
class CannyParams:
    sigma: float = 1.4
    low: float = 0.0
    high: float = 0.0
    magnitude_mode: str = "exact"  # "exact" | "manhattan-approx"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if not 0 <= self.low <= self.high:
            raise ValueError("need 0 <= low <= high")
        if self.magnitude_mode not in ("exact", "manhattan-approx"):
            raise ValueError(f"unknown magnitude mode {self.magnitude_mode!r}")


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    mag: np.ndarray
    theta_deg: np.ndarray  # folded into [0, 180)

    @property
    def width(self):
        return self.mag.shape[1]

    @property
    def height(self):
        return self.mag.shape[0]


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Sampled Gaussian of half-width ceil(3*sigma), normalized to sum 1."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    half = math.ceil(3 * sigma)
    t = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(t * t) / (2 * sigma * sigma))
    return k / k.sum()


def gaussian_deriv_kernel_1d(sigma: float) -> np.ndarray:
    """Derivative-of-Gaussian samples, scaled by the smoothing kernel's normalizer."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    half = math.ceil(3 * sigma)
    t = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(t * t) / (2 * sigma * sigma))
    return (-t / (sigma * sigma)) * g / g.sum()


def conv1d_replicate(a: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """'Same'-size 1D convolution along an axis with replicated borders."""
    half = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (half, half)
    p = np.pad(a, pad, mode="edge")
    win = np.lib.stride_tricks.sliding_window_view(p, len(kernel), axis=axis)
    return win @ kernel[::-1]  # convolution == correlation with reversed kernel


def magnitude(gx, gy, mode: str = "exact"):
    """Gradient magnitude: euclidean, or |gx|+|gy| when speed matters."""
    if mode == "exact":
        return np.sqrt(np.square(gx) + np.square(gy))
    if mode == "manhattan-approx":
        return np.abs(gx) + np.abs(gy)
    raise ValueError(f"unknown magnitude mode {mode!r}")


def gradients(img: GrayImage, sigma: float, mode: str = "exact") -> GradientField:
    """Separable derivative-of-Gaussian gradients (x = column, y = row)."""
    a = img.pixels.astype(np.float64)
    g = gaussian_kernel_1d(sigma)
    d = gaussian_deriv_kernel_1d(sigma)
    gx = conv1d_replicate(conv1d_replicate(a, d, axis=1), g, axis=0)
    gy = conv1d_replicate(conv1d_replicate(a, g, axis=1), d, axis=0)
    mag = magnitude(gx, gy, mode)
    theta = np.degrees(np.arctan2(gy, gx)) % 180.0
    theta[theta == 180.0] = 0.0
    return GradientField(gx=gx, gy=gy, mag=mag, theta_deg=theta)


# Direction bin -> the two neighbor offsets (dx, dy) along the gradient.
# The vertical/anti-diagonal pairs follow the gradient geometry for the
# 90-degree and 135-degree bins.
_NEIGHBORS = {
    0: ((-1, 0), (1, 0)),
    45: ((-1, -1), (1, 1)),
    90: ((0, -1), (0, 1)),
    135: ((-1, 1), (1, -1)),
}


def direction_bin(theta_deg: float):
    """Quantize an angle to one of four directions with its neighbor-offset pair."""
    t = theta_deg % 180.0
    if t <= 22.5 or t > 157.5:
        b = 0
    elif t <= 67.5:
        b = 45
    elif t <= 112.5:
        b = 90
    else:
        b = 135
    return b, _NEIGHBORS[b]


def non_max_suppress(field: GradientField) -> np.ndarray:
    """Zero every pixel whose along-gradient neighbor is strictly greater in magnitude."""
    mag = field.mag
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")  # off-image neighbors count as 0

    t = field.theta_deg
    bins = np.full(t.shape, 0, dtype=np.int32)
    bins[(t > 22.5) & (t <= 67.5)] = 45
    bins[(t > 67.5) & (t <= 112.5)] = 90
    bins[(t > 112.5) & (t <= 157.5)] = 135

    keep = np.ones(mag.shape, dtype=bool)
    for b, ((dx1, dy1), (dx2, dy2)) in _NEIGHBORS.items():
        sel = bins == b
        n1 = padded[1 + dy1 : 1 + dy1 + h, 1 + dx1 : 1 + dx1 + w]
        n2 = padded[1 + dy2 : 1 + dy2 + h, 1 + dx2 : 1 + dx2 + w]
        keep &= ~sel | ((n1 <= mag) & (n2 <= mag))
    return np.where(keep, mag, 0.0)


_EIGHT = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def hysteresis(nms: np.ndarray, low: float, high: float) -> EdgeMap:
    """Dual-threshold edge tracking: strong pixels seed 8-connected growth through weak ones."""
    if low > high:
        raise ValueError("need low <= high")
    weak = nms >= low
    kept = nms >= high
    h, w = nms.shape
    queue = deque(zip(*np.nonzero(kept)))
    while queue:
        y, x = queue.popleft()
        for dy, dx in _EIGHT:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and weak[ny, nx] and not kept[ny, nx]:
                kept[ny, nx] = True
                queue.append((ny, nx))
    return EdgeMap(kept)


def chamfer_manhattan(edges: EdgeMap) -> np.ndarray:
    """Per-pixel L1 distance to the nearest edge pixel (two-pass transform)."""
    if not edges.bits.any():
        raise ValueError("chamfer distance undefined: no edge pixels")
    h, w = edges.bits.shape
    inf = h + w + 1
    d = np.where(edges.bits, 0, inf).astype(np.int64)
    for y in range(h):
        for x in range(w):
            v = d[y, x]
            if y > 0:
                v = min(v, d[y - 1, x] + 1)
            if x > 0:
                v = min(v, d[y, x - 1] + 1)
            d[y, x] = v
    for y in range(h - 1, -1, -1):
        for x in range(w - 1, -1, -1):
            v = d[y, x]
            if y < h - 1:
                v = min(v, d[y + 1, x] + 1)
            if x < w - 1:
                v = min(v, d[y, x + 1] + 1)
            d[y, x] = v
    return d


def canny(img: GrayImage, params: CannyParams) -> EdgeMap:
    """Full detector: gradients -> non-maximum suppression -> hysteresis."""
    field = gradients(img, params.sigma, params.magnitude_mode)
    return hysteresis(non_max_suppress(field), params.low, params.high)


def relative_thresholds(img: GrayImage, params: CannyParams, low_frac=0.1, high_frac=0.25):
    """Derive absolute hysteresis thresholds as fractions of the max gradient magnitude."""
    field = gradients(img, params.sigma, params.magnitude_mode)
    m = float(field.mag.max())
    return low_frac * m, high_frac * m
