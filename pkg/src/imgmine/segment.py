"""Object extraction, texture features, hierarchical item encoding, transaction DB I/O."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .prep import dilate, square3
from .raster import BinaryImage, EdgeMap, GrayImage

FEATURE_NAMES = (
    "area",
    "mean_intensity",
    "glcm_contrast",
    "glcm_energy",
    "glcm_homogeneity",
    "glcm_entropy",
)

CLASSES = ("normal", "benign", "malignant")
CLASS_ITEMS = {name: 901 + i for i, name in enumerate(CLASSES)}
ITEM_CLASSES = {v: k for k, v in CLASS_ITEMS.items()}
NO_OBJECT_ITEM = 999  # sentinel for images with no extracted regions

GLCM_LEVELS = 8


class TdbError(ValueError):
    """Malformed transaction database input."""


@dataclass(frozen=True)
class Region:
    """8-connected pixel component; coords is an (n, 2) array of (y, x)."""

    coords: np.ndarray
    bbox: tuple  # (ymin, xmin, ymax, xmax)

    @property
    def area(self):
        return self.coords.shape[0]


@dataclass(frozen=True)
class FeatureVector:
    area: float
    mean_intensity: float
    glcm_contrast: float
    glcm_energy: float
    glcm_homogeneity: float
    glcm_entropy: float

    def value(self, name):
        return getattr(self, name)


@dataclass(frozen=True)
class Transaction:
    tid: str
    items: tuple
    label: Optional[str] = None

    def __post_init__(self):
        items = tuple(sorted(set(int(i) for i in self.items)))
        if any(i <= 0 for i in items):
            raise ValueError("items must be positive integers")
        object.__setattr__(self, "items", items)
        if self.label is not None and self.label not in CLASSES:
            raise ValueError(f"unknown class label {self.label!r}")


@dataclass
class TransactionDB:
    transactions: list = field(default_factory=list)

    def __post_init__(self):
        tids = [t.tid for t in self.transactions]
        if len(set(tids)) != len(tids):
            raise TdbError("duplicate tids in transaction database")

    def __len__(self):
        return len(self.transactions)

    def item_universe(self):
        u = set()
        for t in self.transactions:
            u.update(t.items)
        return u


def _fill_holes(mask: np.ndarray) -> np.ndarray:
    """Fill background pockets not reachable from the border (4-connected background)."""
    h, w = mask.shape
    reach = np.zeros_like(mask)
    queue = deque()
    for x in range(w):
        for y in (0, h - 1):
            if not mask[y, x] and not reach[y, x]:
                reach[y, x] = True
                queue.append((y, x))
    for y in range(h):
        for x in (0, w - 1):
            if not mask[y, x] and not reach[y, x]:
                reach[y, x] = True
                queue.append((y, x))
    while queue:
        y, x = queue.popleft()
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < h and 0 <= nx < w and not mask[ny, nx] and not reach[ny, nx]:
                reach[ny, nx] = True
                queue.append((ny, nx))
    return mask | ~reach


_EIGHT = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def extract_regions(edges: EdgeMap, img: GrayImage, min_area: int = 25):
    """Close gaps (one 3x3 dilation), fill holes, label 8-connected components.

    Components smaller than min_area are dropped; the result is ordered by
    (bounding-box top-left corner, area) so extraction is deterministic.
    """
    if (edges.height, edges.width) != (img.height, img.width):
        raise ValueError("edge map and image dimensions differ")
    mask = _fill_holes(dilate(edges, square3()).bits)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    regions = []
    nxt = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and labels[y, x] == 0:
                nxt += 1
                labels[y, x] = nxt
                comp = [(y, x)]
                queue = deque([(y, x)])
                while queue:
                    cy, cx = queue.popleft()
                    for dy, dx in _EIGHT:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and labels[ny, nx] == 0:
                            labels[ny, nx] = nxt
                            comp.append((ny, nx))
                            queue.append((ny, nx))
                if len(comp) >= min_area:
                    coords = np.array(sorted(comp), dtype=np.int64)
                    bbox = (
                        int(coords[:, 0].min()),
                        int(coords[:, 1].min()),
                        int(coords[:, 0].max()),
                        int(coords[:, 1].max()),
                    )
                    regions.append(Region(coords=coords, bbox=bbox))
    regions.sort(key=lambda r: (r.bbox[0], r.bbox[1], r.area))
    return regions


def glcm_features(img: GrayImage, region: Region) -> FeatureVector:
    """Area, mean intensity and four co-occurrence statistics for one region.

    Intensities are quantized to 8 levels; the co-occurrence matrix is the
    symmetric horizontal-offset matrix over in-region pixel pairs.
    """
    if region.area == 0:
        raise ValueError("region is empty")
    ys, xs = region.coords[:, 0], region.coords[:, 1]
    vals = img.pixels[ys, xs].astype(np.float64)
    levels = (img.pixels.astype(np.int32) * GLCM_LEVELS) // 256

    member = set(map(tuple, region.coords.tolist()))
    counts = np.zeros((GLCM_LEVELS, GLCM_LEVELS), dtype=np.float64)
    for y, x in member:
        if (y, x + 1) in member:
            i, j = levels[y, x], levels[y, x + 1]
            counts[i, j] += 1
            counts[j, i] += 1
    total = counts.sum()
    if total == 0:
        raise ValueError("GLCM undefined: no horizontally adjacent pixel pair in region")
    p = counts / total
    ii, jj = np.meshgrid(np.arange(GLCM_LEVELS), np.arange(GLCM_LEVELS), indexing="ij")
    contrast = float(((ii - jj) ** 2 * p).sum())
    energy = float((p * p).sum())
    homogeneity = float((p / (1.0 + np.abs(ii - jj))).sum())
    nz = p[p > 0]
    entropy = float(-(nz * np.log2(nz)).sum())
    return FeatureVector(
        area=float(region.area),
        mean_intensity=float(vals.mean()),
        glcm_contrast=contrast,
        glcm_energy=energy,
        glcm_homogeneity=homogeneity,
        glcm_entropy=max(entropy, 0.0),
    )


@dataclass
class QuantizationModel:
    """Per-feature (min, max) ranges learned from the training corpus."""

    ranges: dict = field(default_factory=dict)  # feature name -> (min, max)

    @classmethod
    def fit(cls, fvs) -> "QuantizationModel":
        fvs = list(fvs)
        ranges = {}
        for name in FEATURE_NAMES:
            vals = [fv.value(name) for fv in fvs]
            if vals:
                ranges[name] = (min(vals), max(vals))
        return cls(ranges=ranges)

    def to_dict(self):
        return {name: [lo, hi] for name, (lo, hi) in self.ranges.items()}

    @classmethod
    def from_dict(cls, d):
        return cls(ranges={name: (float(v[0]), float(v[1])) for name, v in d.items()})


def _fine_bin(value: float, lo: float, hi: float) -> int:
    """Equal-width bin 1..4 over [lo, hi], clamped; the top bin is right-closed."""
    if hi <= lo:
        return 1
    if value >= hi:
        return 4
    if value <= lo:
        return 1
    return 1 + int(4 * (value - lo) / (hi - lo))


def encode_item(feature_index: int, fine: int) -> int:
    """3-digit code: feature digit, coarse half (1..2), fine position within it (1..2)."""
    coarse = 1 if fine <= 2 else 2
    return 100 * feature_index + 10 * coarse + (fine - 2 * (coarse - 1))


def decode_item(code: int):
    """Inverse of encode_item: (feature_index, coarse, fine 1..4)."""
    feature, coarse, pos = code // 100, (code // 10) % 10, code % 10
    if not (1 <= feature <= len(FEATURE_NAMES) and coarse in (1, 2) and pos in (1, 2)):
        raise ValueError(f"not a feature item code: {code}")
    return feature, coarse, pos + 2 * (coarse - 1)


def coarse_item(code: int) -> int:
    """Collapse a fine item to its coarse-level code; non-feature items pass through."""
    try:
        feature, coarse, _ = decode_item(code)
    except ValueError:
        return code
    return 100 * feature + 10 * coarse


def quantize(fv: FeatureVector, qm: QuantizationModel):
    """Map each feature value to its hierarchical item code."""
    items = set()
    for idx, name in enumerate(FEATURE_NAMES, start=1):
        if name not in qm.ranges:
            raise KeyError(f"quantization model missing range for {name!r}")
        lo, hi = qm.ranges[name]
        items.add(encode_item(idx, _fine_bin(fv.value(name), lo, hi)))
    return items


def image_to_transaction(
    img: GrayImage,
    edges: EdgeMap,
    qm: QuantizationModel,
    tid: str,
    label: Optional[str] = None,
    min_area: int = 25,
) -> Transaction:
    """One transaction per image: the union of all regions' quantized codes."""
    items = set()
    for region in extract_regions(edges, img, min_area=min_area):
        try:
            fv = glcm_features(img, region)
        except ValueError:
            continue  # region too thin for a co-occurrence pair
        items |= quantize(fv, qm)
    if not items:
        items = {NO_OBJECT_ITEM}
    return Transaction(tid=tid, items=tuple(sorted(items)), label=label)


TDB_HEADER = "tid,label,items"


def write_tdb_csv(db: TransactionDB) -> bytes:
    lines = [TDB_HEADER]
    for t in db.transactions:
        lines.append(f"{t.tid},{t.label or ''},{';'.join(str(i) for i in t.items)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_tdb_csv(data: bytes) -> TransactionDB:
    text = data.decode("utf-8")
    transactions = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if lineno == 1 and line.strip() == TDB_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise TdbError(f"line {lineno}: expected 'tid,label,items'")
        tid, label, items_str = parts
        if tid in seen:
            raise TdbError(f"line {lineno}: duplicate tid {tid!r}")
        seen.add(tid)
        try:
            items = tuple(int(s) for s in items_str.split(";") if s)
        except ValueError:
            raise TdbError(f"line {lineno}: non-numeric item in {items_str!r}") from None
        try:
            transactions.append(Transaction(tid=tid, items=items, label=label or None))
        except ValueError as exc:
            raise TdbError(f"line {lineno}: {exc}") from None
    return TransactionDB(transactions=transactions)
