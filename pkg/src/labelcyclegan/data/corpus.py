"""Labeled image corpora, dataset manifests, and imbalance induction.

A corpus is an immutable bundle of images in [-1, 1], integer labels and a
domain tag. Corpora are built once (synthetic renderer or file ingestion)
and shared read-only by every training phase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..seeding import new_rng

DOMAINS = ("real", "simulated")
SPLITS = ("train", "test")
SOURCES = ("synthetic", "idx_files", "png_directory")

MIN_IMAGE_SIDE = 16


class InvalidManifestError(ValueError):
    """Manifest violates a structural constraint."""


class LabeledImage(NamedTuple):
    pixels: np.ndarray  # (H, W, C) float32 in [-1, 1]
    label: int
    domain: str


@dataclass(frozen=True)
class DatasetManifest:
    """Declarative description of one corpus split."""

    name: str
    domain: str
    class_count: int
    image_shape: tuple[int, int, int]
    split: str
    item_count_per_class: tuple[int, ...]
    source: str
    seed: int
    hflip: bool = False
    # source-specific extras (idx_files / png_directory only)
    images_path: str | None = None
    labels_path: str | None = None
    root: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "image_shape", tuple(int(v) for v in self.image_shape))
        object.__setattr__(
            self, "item_count_per_class", tuple(int(v) for v in self.item_count_per_class)
        )
        self.validate()

    def validate(self):
        if self.domain not in DOMAINS:
            raise InvalidManifestError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if self.split not in SPLITS:
            raise InvalidManifestError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.source not in SOURCES:
            raise InvalidManifestError(f"source must be one of {SOURCES}, got {self.source!r}")
        if self.class_count < 2:
            raise InvalidManifestError(f"class_count must be >= 2, got {self.class_count}")
        h, w, c = self.image_shape
        if h < MIN_IMAGE_SIDE or w < MIN_IMAGE_SIDE:
            raise InvalidManifestError(
                f"image sides must be >= {MIN_IMAGE_SIDE}, got {h}x{w} (unsupported shape)"
            )
        if c != 3:
            raise InvalidManifestError(f"canonical channel count is 3, got {c}")
        if self.item_count_per_class:
            if len(self.item_count_per_class) != self.class_count:
                raise InvalidManifestError(
                    "item_count_per_class length "
                    f"{len(self.item_count_per_class)} != class_count {self.class_count}"
                )
            if any(n < 0 for n in self.item_count_per_class):
                raise InvalidManifestError("item_count_per_class entries must be >= 0")
            if self.split == "train" and sum(self.item_count_per_class) <= 0:
                raise InvalidManifestError("train split needs item_count_per_class sum > 0")
        elif self.source == "synthetic":
            raise InvalidManifestError("synthetic manifests need explicit item_count_per_class")
        if self.seed < 0:
            raise InvalidManifestError("seed must be unsigned")

    def to_json(self) -> str:
        payload = asdict(self)
        payload["image_shape"] = list(self.image_shape)
        payload["item_count_per_class"] = list(self.item_count_per_class)
        for key in ("images_path", "labels_path", "root"):
            if payload[key] is None:
                del payload[key]
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidManifestError(f"manifest is not valid JSON: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise InvalidManifestError(f"unknown manifest fields: {sorted(unknown)}")
        missing = {"name", "domain", "class_count", "image_shape", "split", "source", "seed"} - set(payload)
        if missing:
            raise InvalidManifestError(f"missing manifest fields: {sorted(missing)}")
        payload.setdefault("item_count_per_class", [])
        return cls(**payload)

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        return cls.from_json(Path(path).read_text())

    def save(self, path: str | Path):
        Path(path).write_text(self.to_json() + "\n")


@dataclass(frozen=True)
class ImbalanceSpec:
    """Which classes are artificially rare and by how much."""

    minor_classes: tuple[int, ...]
    reduction_rate: float

    def __post_init__(self):
        object.__setattr__(self, "minor_classes", tuple(sorted(set(int(c) for c in self.minor_classes))))
        if not 0.0 <= self.reduction_rate < 1.0:
            raise ValueError(f"reduction_rate must be in [0, 1), got {self.reduction_rate}")
        if any(c < 0 for c in self.minor_classes):
            raise ValueError("minor class indices must be >= 0")

    def validate_for(self, class_count: int):
        bad = [c for c in self.minor_classes if c >= class_count]
        if bad:
            raise ValueError(f"minor classes {bad} out of range for class_count {class_count}")


@dataclass
class Corpus:
    """Immutable labeled image collection for one domain/split."""

    images: np.ndarray  # (N, H, W, C) float32 in [-1, 1]
    labels: np.ndarray  # (N,) int64
    domain: str
    class_count: int
    name: str = ""

    def __post_init__(self):
        self.images = np.ascontiguousarray(self.images, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.images.ndim != 4:
            raise ValueError(f"images must be (N, H, W, C), got shape {self.images.shape}")
        if len(self.labels) != len(self.images):
            raise ValueError("labels and images disagree on item count")
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise ValueError(f"labels must lie in [0, {self.class_count})")
        lo, hi = (self.images.min(), self.images.max()) if len(self.images) else (0.0, 0.0)
        if lo < -1.0 - 1e-6 or hi > 1.0 + 1e-6:
            raise ValueError(f"pixel values outside [-1, 1]: range [{lo}, {hi}]")

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, i: int) -> LabeledImage:
        return LabeledImage(self.images[i], int(self.labels[i]), self.domain)

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return tuple(self.images.shape[1:])

    def counts_per_class(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

    def class_indices(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    def subset(self, indices: np.ndarray, name: str | None = None) -> "Corpus":
        return Corpus(
            images=self.images[indices],
            labels=self.labels[indices],
            domain=self.domain,
            class_count=self.class_count,
            name=self.name if name is None else name,
        )

    def with_domain(self, domain: str) -> "Corpus":
        return Corpus(self.images, self.labels, domain, self.class_count, self.name)

    def save(self, path: str | Path):
        np.savez_compressed(
            path,
            images=self.images,
            labels=self.labels,
            domain=np.asarray(self.domain),
            class_count=np.asarray(self.class_count),
            name=np.asarray(self.name),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Corpus":
        with np.load(path, allow_pickle=False) as data:
            return cls(
                images=data["images"],
                labels=data["labels"],
                domain=str(data["domain"]),
                class_count=int(data["class_count"]),
                name=str(data["name"]),
            )


def retained_count(n_items: int, reduction_rate: float) -> int:
    """Items kept in a minor class: ceil((1 - rate) * n), at least 1.

    The small epsilon shields the ceiling from float noise such as
    (1 - 0.3) * 10 == 7.000000000000001.
    """
    kept = math.ceil((1.0 - reduction_rate) * n_items - 1e-9)
    return max(1, kept)


def induce_imbalance(corpus: Corpus, spec: ImbalanceSpec, seed: int) -> Corpus:
    """Uniformly subsample the minor classes, leaving the rest untouched.

    Kept items preserve corpus order; deterministic given seed.
    """
    spec.validate_for(corpus.class_count)
    counts = corpus.counts_per_class()
    for c in spec.minor_classes:
        if counts[c] == 0:
            raise ValueError(f"minor class {c} absent from corpus {corpus.name!r}")
    if spec.reduction_rate == 0.0:
        return corpus
    keep = np.ones(len(corpus), dtype=bool)
    rng = new_rng(seed, "induce_imbalance")
    for c in spec.minor_classes:
        idx = corpus.class_indices(c)
        n_keep = retained_count(len(idx), spec.reduction_rate)
        if n_keep == 0:
            raise ValueError(f"minor class {c} would retain 0 items")
        chosen = rng.choice(idx, size=n_keep, replace=False)
        keep[idx] = False
        keep[np.sort(chosen)] = True
    return corpus.subset(np.flatnonzero(keep))
