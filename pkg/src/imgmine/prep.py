"""Preprocessing: histogram peak alignment, equalization, median filter, binary morphology."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BinaryImage, GrayImage


def histogram(img: GrayImage) -> np.ndarray:
    """256-bin intensity histogram; bins[v] = count of pixels with intensity v."""
    return np.bincount(img.pixels.ravel(), minlength=256).astype(np.int64)


def average_histogram(imgs) -> np.ndarray:
    """Per-bin rounded mean of the images' histograms (round half up)."""
    imgs = list(imgs)
    if not imgs:
        raise ValueError("average_histogram needs at least one image")
    total = np.zeros(256, dtype=np.float64)
    for img in imgs:
        total += histogram(img)
    return np.floor(total / len(imgs) + 0.5).astype(np.int64)


def histogram_peak(hist) -> int:
    """Smallest intensity attaining the maximum count."""
    return int(np.argmax(hist))


def align_peak(img: GrayImage, avg) -> GrayImage:
    """Shift all intensities so the image's histogram peak lands on the average's peak."""
    avg = np.asarray(avg)
    if avg.sum() <= 0:
        raise ValueError("average histogram is empty")
    delta = histogram_peak(avg) - histogram_peak(histogram(img))
    if delta == 0:
        return img
    shifted = np.clip(img.pixels.astype(np.int32) + delta, 0, 255)
    return GrayImage(shifted.astype(np.uint8))


def equalize(img: GrayImage) -> GrayImage:
    """Histogram equalization: v -> round(255 * CDF(v)), round half up."""
    counts = histogram(img)
    cdf = np.cumsum(counts) / counts.sum()
    lut = np.floor(255.0 * cdf + 0.5).astype(np.uint8)
    return GrayImage(lut[img.pixels])


def median3x3(img: GrayImage) -> GrayImage:
    """3x3 median filter with edge replication at the borders."""
    p = np.pad(img.pixels, 1, mode="edge")
    h, w = img.pixels.shape
    stack = np.stack([p[dy : dy + h, dx : dx + w] for dy in range(3) for dx in range(3)])
    return GrayImage(np.median(stack, axis=0).astype(np.uint8))


@dataclass(frozen=True)
class StructuringElement:
    """Odd-sized binary probe with its origin at the center cell."""

    bits: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.bits, dtype=bool)
        if a.ndim != 2 or a.shape[0] % 2 == 0 or a.shape[1] % 2 == 0:
            raise ValueError("structuring element must be 2D with odd dimensions")
        if not a[a.shape[0] // 2, a.shape[1] // 2]:
            raise ValueError("structuring element origin must be a member")
        object.__setattr__(self, "bits", a)

    def offsets(self):
        """Member offsets (dy, dx) relative to the center."""
        cy, cx = self.bits.shape[0] // 2, self.bits.shape[1] // 2
        ys, xs = np.nonzero(self.bits)
        return list(zip((ys - cy).tolist(), (xs - cx).tolist()))


def square3() -> StructuringElement:
    return StructuringElement(np.ones((3, 3), dtype=bool))


def _shift(mask: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Translate a boolean mask by (dy, dx); off-image cells become background."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    ys = slice(max(0, dy), min(h, h + dy))
    xs = slice(max(0, dx), min(w, w + dx))
    yss = slice(max(0, -dy), min(h, h - dy))
    xss = slice(max(0, -dx), min(w, w - dx))
    out[ys, xs] = mask[yss, xss]
    return out


def erode(a: BinaryImage, b: StructuringElement) -> BinaryImage:
    """Keep p iff every member of b translated to p lands on foreground."""
    out = np.ones_like(a.bits)
    for dy, dx in b.offsets():
        out &= _shift(a.bits, -dy, -dx)
    return BinaryImage(out)


def dilate(a: BinaryImage, b: StructuringElement) -> BinaryImage:
    """Keep p iff some reflected member of b translated to p hits foreground."""
    out = np.zeros_like(a.bits)
    for dy, dx in b.offsets():
        out |= _shift(a.bits, dy, dx)
    return BinaryImage(out)


def open_(a: BinaryImage, b: StructuringElement) -> BinaryImage:
    """Morphological opening: erosion followed by dilation."""
    return dilate(erode(a, b), b)


def otsu_threshold(img: GrayImage) -> int:
    """Otsu's threshold maximizing between-class variance (smallest argmax on ties)."""
    counts = histogram(img).astype(np.float64)
    total = counts.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(counts)
    m0 = np.cumsum(counts * levels)
    mean_all = m0[-1] / total
    w1 = total - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = m0 / w0
        mu1 = (m0[-1] - m0) / w1
        var = w0 * w1 * (mu0 - mu1) ** 2
    var[np.isnan(var)] = -1.0
    # threshold t separates [0, t-1] from [t, 255]
    return int(np.argmax(var[:-1])) + 1


def opening_mask(img: GrayImage, se: StructuringElement | None = None) -> BinaryImage:
    """Otsu-threshold the image and open the mask; removes small foreground objects."""
    if se is None:
        se = square3()
    from .raster import threshold

    return open_(threshold(img, otsu_threshold(img)), se)
