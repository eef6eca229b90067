"""Ingestion of external corpora: IDX binary files and PNG directories.

Both paths normalize to the canonical corpus form: float32 pixels in
[-1, 1], 3 channels, resized to the manifest's image shape by bilinear
interpolation. Matrix-container files (e.g. .mat) must be pre-converted.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from ..seeding import new_rng
from .corpus import Corpus, DatasetManifest, InvalidManifestError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """IDX file violates the expected binary layout."""


def _read_idx_images(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise IdxFormatError(f"{path}: truncated header")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}"
        )
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise IdxFormatError(f"{path}: truncated file ({len(raw)} bytes, need {expected})")
    data = np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols, offset=16)
    return data.reshape(count, rows, cols)


def _read_idx_labels(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise IdxFormatError(f"{path}: truncated header")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}"
        )
    if len(raw) < 8 + count:
        raise IdxFormatError(f"{path}: truncated file ({len(raw)} bytes, need {8 + count})")
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=8).astype(np.int64)


def write_idx(images_path: str | Path, labels_path: str | Path,
              images: np.ndarray, labels: np.ndarray):
    """Write uint8 images (N, H, W) and labels (N,) in IDX layout."""
    n, rows, cols = images.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(np.ascontiguousarray(images, dtype=np.uint8).tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, n))
        fh.write(np.ascontiguousarray(labels, dtype=np.uint8).tobytes())


def _resize_bilinear(images: np.ndarray, h: int, w: int) -> np.ndarray:
    """Resize (N, H, W, C) float images with bilinear interpolation."""
    if images.shape[1] == h and images.shape[2] == w:
        return images
    t = torch.from_numpy(np.transpose(images, (0, 3, 1, 2)))
    t = torch.nn.functional.interpolate(t, size=(h, w), mode="bilinear", align_corners=False)
    return np.transpose(t.numpy(), (0, 2, 3, 1))


def _normalize(images01: np.ndarray, manifest: DatasetManifest) -> np.ndarray:
    """[0,1] float images of any channel count -> manifest shape in [-1,1]."""
    if images01.ndim == 3:
        images01 = images01[..., None]
    if images01.shape[-1] == 1:
        images01 = np.repeat(images01, 3, axis=-1)
    h, w, _ = manifest.image_shape
    images01 = _resize_bilinear(images01.astype(np.float32), h, w)
    return np.clip(images01 * 2.0 - 1.0, -1.0, 1.0).astype(np.float32)


def _apply_caps_and_flip(images: np.ndarray, labels: np.ndarray,
                         manifest: DatasetManifest) -> tuple[np.ndarray, np.ndarray]:
    """Per-class caps from item_count_per_class (when given) and build-time flips."""
    if manifest.item_count_per_class and sum(manifest.item_count_per_class) > 0:
        rng = new_rng(manifest.seed, "ingest.caps", manifest.name)
        keep = np.zeros(len(labels), dtype=bool)
        for cls, cap in enumerate(manifest.item_count_per_class):
            idx = np.flatnonzero(labels == cls)
            if cap and len(idx) > cap:
                idx = np.sort(rng.choice(idx, size=cap, replace=False))
            keep[idx] = True
        images, labels = images[keep], labels[keep]
    if manifest.hflip:
        rng = new_rng(manifest.seed, "ingest.hflip", manifest.name)
        flip = rng.random(len(images)) < 0.5
        images = images.copy()
        images[flip] = images[flip, :, ::-1, :]
    return images, labels


def ingest_idx(images_path: str | Path, labels_path: str | Path,
               manifest: DatasetManifest) -> Corpus:
    """Load an IDX image/label file pair into canonical corpus form."""
    raw_images = _read_idx_images(images_path)
    labels = _read_idx_labels(labels_path)
    if len(raw_images) != len(labels):
        raise IdxFormatError(
            f"count mismatch: {len(raw_images)} images vs {len(labels)} labels"
        )
    if len(labels) and labels.max() >= manifest.class_count:
        raise InvalidManifestError(
            f"label {labels.max()} outside manifest class_count {manifest.class_count}"
        )
    images = _normalize(raw_images.astype(np.float32) / 255.0, manifest)
    images, labels = _apply_caps_and_flip(images, labels, manifest)
    return Corpus(images, labels, manifest.domain, manifest.class_count, manifest.name)


def ingest_png_directory(root: str | Path, manifest: DatasetManifest) -> Corpus:
    """Load a ``<root>/<label>/<name>.png`` tree into canonical corpus form."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"png directory {root} does not exist")
    images, labels = [], []
    class_dirs = sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: d.name)
    for class_dir in class_dirs:
        try:
            cls = int(class_dir.name)
        except ValueError:
            raise InvalidManifestError(f"class directory {class_dir.name!r} is not an integer")
        if not 0 <= cls < manifest.class_count:
            raise InvalidManifestError(
                f"class directory {cls} outside manifest class_count {manifest.class_count}"
            )
        for png in sorted(class_dir.glob("*.png")):
            with Image.open(png) as im:
                arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
            images.append(arr)
            labels.append(cls)
    if not images:
        raise InvalidManifestError(f"no PNG files found under {root}")
    shapes = {im.shape for im in images}
    if len(shapes) > 1:
        raise InvalidManifestError(f"PNG files disagree on shape: {sorted(shapes)}")
    stack = _normalize(np.stack(images), manifest)
    labels_arr = np.asarray(labels, dtype=np.int64)
    stack, labels_arr = _apply_caps_and_flip(stack, labels_arr, manifest)
    return Corpus(stack, labels_arr, manifest.domain, manifest.class_count, manifest.name)


def build_corpus(manifest: DatasetManifest) -> Corpus:
    """Dispatch corpus construction on the manifest's source."""
    if manifest.source == "synthetic":
        from .synthetic import build_synthetic_corpus

        return build_synthetic_corpus(manifest)
    if manifest.source == "idx_files":
        if not manifest.images_path or not manifest.labels_path:
            raise InvalidManifestError("idx_files manifests need images_path and labels_path")
        return ingest_idx(manifest.images_path, manifest.labels_path, manifest)
    if manifest.source == "png_directory":
        if not manifest.root:
            raise InvalidManifestError("png_directory manifests need root")
        return ingest_png_directory(manifest.root, manifest)
    raise InvalidManifestError(f"unknown source {manifest.source!r}")
