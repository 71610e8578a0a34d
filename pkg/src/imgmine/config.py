"""Pipeline configuration and dataset manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .segment import CLASSES


class ConfigError(ValueError):
    pass


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    sigma: float = 1.4
    # Absolute hysteresis thresholds; when unset, each image uses
    # 0.1 / 0.25 of its own maximum gradient magnitude.
    canny_low: Optional[float] = None
    canny_high: Optional[float] = None
    magnitude_mode: str = "exact"
    min_area: int = 25
    minsup: float = 0.10
    minconf: float = 0.97
    levels: int = 2
    attribute_cap: int = 64
    equalize: bool = True
    seed: int = 42

    def __post_init__(self):
        if not 0 < self.minsup <= 1:
            raise ConfigError("minsup must lie in (0, 1]")
        if not 0 < self.minconf <= 1:
            raise ConfigError("minconf must lie in (0, 1]")
        if self.sigma <= 0:
            raise ConfigError("sigma must be > 0")
        if self.min_area < 1:
            raise ConfigError("min_area must be >= 1")
        if (self.canny_low is None) != (self.canny_high is None):
            raise ConfigError("set both canny_low and canny_high or neither")
        if self.canny_low is not None and not 0 <= self.canny_low <= self.canny_high:
            raise ConfigError("need 0 <= canny_low <= canny_high")


def load_config(path=None, overrides=None) -> PipelineConfig:
    """Config file (flat JSON keys) with CLI overrides layered on top."""
    values = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"no such config file: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config JSON in {path}: {exc}") from None
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)
    cfg = PipelineConfig(**values)
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg


def config_to_json(cfg: PipelineConfig) -> str:
    doc = {f.name: getattr(cfg, f.name) for f in fields(PipelineConfig)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: Optional[str]
    split: str  # "train" | "test"


@dataclass
class Manifest:
    entries: list = field(default_factory=list)
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        paths = [e.path for e in self.entries]
        if len(set(paths)) != len(paths):
            raise ManifestError("duplicate image paths in manifest")
        for e in self.entries:
            if e.label is not None and e.label not in CLASSES:
                raise ManifestError(f"unknown label {e.label!r} for {e.path}")
            if e.split not in ("train", "test"):
                raise ManifestError(f"unknown split {e.split!r} for {e.path}")

    def split(self, which):
        return [e for e in self.entries if e.split == which]

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.base_dir / entry.path


MANIFEST_HEADER = "path,label,split"


def read_manifest(path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ManifestError(f"no such manifest: {path}") from None
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if lineno == 1 and line.strip() == MANIFEST_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ManifestError(f"{path}:{lineno}: expected 'path,label,split'")
        p, label, split = (s.strip() for s in parts)
        entries.append(ManifestEntry(path=p, label=label or None, split=split))
    return Manifest(entries=entries, base_dir=path.parent)


def write_manifest(manifest: Manifest) -> str:
    lines = [MANIFEST_HEADER]
    for e in manifest.entries:
        lines.append(f"{e.path},{e.label or ''},{e.split}")
    return "\n".join(lines) + "\n"
