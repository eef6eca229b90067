"""Deterministic synthetic digit-pair corpus.

Two visual styles of the same ten glyph classes, built without downloads:

* ``simulated`` - crisp anti-aliased glyphs over randomized colored
  backgrounds with a luminance gradient and sensor-like noise (a stand-in
  for street-number crops).
* ``real`` - elastically deformed monochrome strokes on a dark field,
  replicated to 3 channels (a stand-in for handwritten digits).

Every image is a pure function of (manifest seed, domain, split, class,
index), so corpora are bit-reproducible and independent of build order.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from ..seeding import derive_seed
from .corpus import Corpus, DatasetManifest, InvalidManifestError

_SUPERSAMPLE = 2


def _arc(cx, cy, rx, ry, deg0, deg1, n=20):
    t = np.radians(np.linspace(deg0, deg1, n))
    return np.column_stack([cx + rx * np.cos(t), cy + ry * np.sin(t)])


# Stroke skeletons on a unit canvas, y growing downward. Each glyph is a
# list of polylines; curves are dense polylines from _arc.
_GLYPHS: dict[int, list[np.ndarray]] = {
    0: [_arc(0.5, 0.5, 0.26, 0.38, 0, 360, 40)],
    1: [np.array([[0.33, 0.3], [0.52, 0.13], [0.52, 0.87]]),
        np.array([[0.34, 0.87], [0.7, 0.87]])],
    2: [np.concatenate([_arc(0.5, 0.32, 0.24, 0.2, 180, 340, 14),
                        np.array([[0.71, 0.42], [0.27, 0.87]]),
                        np.array([[0.27, 0.87], [0.75, 0.87]])])],
    3: [np.concatenate([_arc(0.47, 0.3, 0.22, 0.18, 150, 360, 12),
                        _arc(0.47, 0.66, 0.25, 0.22, 0, 210, 14)])],
    4: [np.array([[0.63, 0.13], [0.26, 0.62], [0.78, 0.62]]),
        np.array([[0.63, 0.13], [0.63, 0.87]])],
    5: [np.concatenate([np.array([[0.72, 0.13], [0.32, 0.13], [0.3, 0.45]]),
                        _arc(0.48, 0.64, 0.22, 0.22, 250, 450, 12),
                        _arc(0.48, 0.64, 0.22, 0.22, 90, 150, 6)])],
    6: [np.concatenate([_arc(0.62, 0.35, 0.32, 0.45, 230, 300, 10)[::-1],
                        _arc(0.48, 0.66, 0.21, 0.2, -90, 270, 24)])],
    7: [np.array([[0.26, 0.13], [0.74, 0.13], [0.42, 0.87]])],
    8: [_arc(0.5, 0.3, 0.18, 0.16, 0, 360, 24),
        _arc(0.5, 0.66, 0.22, 0.2, 0, 360, 24)],
    9: [_arc(0.52, 0.34, 0.2, 0.2, 0, 360, 24),
        np.concatenate([_arc(0.72, 0.34, 0.0, 0.0, 0, 0, 1),
                        np.array([[0.72, 0.34], [0.66, 0.7], [0.52, 0.87]])])],
}


def _segments(glyph: int) -> np.ndarray:
    """All stroke segments of a glyph as an (S, 2, 2) array."""
    segs = []
    for line in _GLYPHS[glyph]:
        segs.append(np.stack([line[:-1], line[1:]], axis=1))
    return np.concatenate(segs, axis=0)


def _distance_to_segments(points: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Min distance from each point (P, 2) to any segment (S, 2, 2)."""
    a, b = segs[:, 0], segs[:, 1]
    ab = b - a  # (S, 2)
    denom = np.maximum((ab * ab).sum(-1), 1e-12)
    ap = points[:, None, :] - a[None, :, :]  # (P, S, 2)
    t = np.clip((ap * ab[None]).sum(-1) / denom[None], 0.0, 1.0)
    closest = a[None] + t[..., None] * ab[None]
    d = np.linalg.norm(points[:, None, :] - closest, axis=-1)
    return d.min(axis=1)


def render_glyph_mask(glyph: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Anti-aliased stroke mask in [0, 1] with randomized pose, (size, size)."""
    segs = _segments(glyph).copy()
    pts = segs.reshape(-1, 2) - 0.5

    angle = np.radians(rng.uniform(-12.0, 12.0))
    scale = rng.uniform(0.75, 1.05)
    shear = rng.uniform(-0.15, 0.15)
    shift = rng.uniform(-0.07, 0.07, size=2)
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    shear_m = np.array([[1.0, shear], [0.0, 1.0]])
    pts = (pts @ shear_m.T @ rot.T) * scale + 0.5 + shift
    segs = pts.reshape(-1, 2, 2)

    ss = size * _SUPERSAMPLE
    grid = (np.arange(ss) + 0.5) / ss
    gx, gy = np.meshgrid(grid, grid)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    d = _distance_to_segments(points, segs).reshape(ss, ss)

    half_width = rng.uniform(0.035, 0.06) * scale
    aa = 0.75 / ss  # soft edge, ~3/4 of a supersampled pixel
    mask = np.clip((half_width - d) / (2 * aa) + 0.5, 0.0, 1.0)
    mask = mask.reshape(size, _SUPERSAMPLE, size, _SUPERSAMPLE).mean(axis=(1, 3))
    return mask.astype(np.float32)


def _elastic_deform(img: np.ndarray, rng: np.random.Generator,
                    alpha: float = 4.0, sigma: float = 4.0) -> np.ndarray:
    h, w = img.shape
    dx = gaussian_filter(rng.uniform(-1, 1, (h, w)), sigma, mode="reflect") * alpha
    dy = gaussian_filter(rng.uniform(-1, 1, (h, w)), sigma, mode="reflect") * alpha
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    coords = np.stack([ys + dy, xs + dx])
    return map_coordinates(img, coords, order=1, mode="constant", cval=0.0)


def _render_real(glyph: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Deformed bright stroke on a near-black field, 3 identical channels."""
    mask = render_glyph_mask(glyph, size, rng)
    mask = _elastic_deform(mask, rng)
    mask = gaussian_filter(mask, sigma=0.5, mode="constant")
    intensity = rng.uniform(0.82, 1.0)
    floor = rng.uniform(0.0, 0.05)
    gray = np.clip(floor + mask * (intensity - floor), 0.0, 1.0)
    return np.repeat(gray[:, :, None], 3, axis=2).astype(np.float32)


def _contrasting_color(rng: np.random.Generator, reference: np.ndarray) -> np.ndarray:
    for _ in range(32):
        color = rng.uniform(0.0, 1.0, size=3)
        if np.abs(color - reference).sum() > 0.9:
            return color
    return 1.0 - reference


def _render_simulated(glyph: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Crisp colored glyph over a colored, gradient-lit, noisy background."""
    mask = render_glyph_mask(glyph, size, rng)
    bg = rng.uniform(0.1, 0.9, size=3)
    fg = _contrasting_color(rng, bg)
    ramp = np.linspace(-1.0, 1.0, size)
    gx, gy = rng.uniform(-0.15, 0.15, size=2)
    gradient = gx * ramp[None, :] + gy * ramp[:, None]
    img = bg[None, None, :] + gradient[:, :, None]
    img = img * (1.0 - mask[:, :, None]) + fg[None, None, :] * mask[:, :, None]
    img += rng.normal(0.0, 0.03, size=img.shape)
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def render_item(domain: str, glyph: int, size: int, rng: np.random.Generator) -> np.ndarray:
    if domain == "real":
        img = _render_real(glyph, size, rng)
    else:
        img = _render_simulated(glyph, size, rng)
    return (img * 2.0 - 1.0).astype(np.float32)


def build_synthetic_corpus(manifest: DatasetManifest) -> Corpus:
    """Render the corpus a manifest declares. Pure function of the manifest."""
    if manifest.source != "synthetic":
        raise InvalidManifestError(f"manifest source is {manifest.source!r}, expected 'synthetic'")
    if manifest.class_count > len(_GLYPHS):
        raise InvalidManifestError(f"at most {len(_GLYPHS)} glyph classes available")
    h, w, _ = manifest.image_shape
    if h != w:
        raise InvalidManifestError("synthetic renderer needs square images")

    images, labels = [], []
    for cls, count in enumerate(manifest.item_count_per_class):
        for i in range(count):
            seed = derive_seed(manifest.seed, "synthetic", manifest.domain, manifest.split, cls, i)
            rng = np.random.default_rng(seed)
            img = render_item(manifest.domain, cls, h, rng)
            if manifest.hflip and rng.random() < 0.5:
                img = img[:, ::-1, :].copy()
            images.append(img)
            labels.append(cls)
    return Corpus(
        images=np.stack(images) if images else np.zeros((0, h, w, 3), np.float32),
        labels=np.asarray(labels, dtype=np.int64),
        domain=manifest.domain,
        class_count=manifest.class_count,
        name=manifest.name,
    )
