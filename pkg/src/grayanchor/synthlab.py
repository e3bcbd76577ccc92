"""Synthetic Lambertian scenes with exact ground truth.

Scenes are patch grids rendered as I = R * C per channel. Texture is a
multiplicative field shared across channels and applied inside gray patches,
so gray stays exactly gray while still passing the detectors' flat-region
gate; chromatic patches stay flat (a flat patch carries no local cue either
way, and leaving it flat keeps the gate's exclusion observable). The
illumination field is either uniform or a smooth per-channel ramp around the
mean illuminant.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError
from .imgio import Dataset, Illuminant, LinearImage, load_manifest, save_image


@dataclass(frozen=True)
class SceneSpec:
    size: tuple = (64, 64)
    grid: tuple = (4, 4)
    gray_fraction: float = 0.3
    texture_amplitude: float = 0.05
    illuminant: Illuminant = field(default_factory=lambda: Illuminant((1.0, 1.0, 1.0)))
    field_kind: str = "uniform"  # "uniform" | "smooth"
    field_strength: float = 0.0  # total ramp span for "smooth"
    reflectance_range: tuple = (0.15, 0.9)
    noise_sigma: float = 0.0  # optional additive sensor noise, fraction of peak
    white_level: float = None  # None -> auto (max value = 0.9 * white_level)

    def __post_init__(self):
        if not (0.0 <= self.texture_amplitude < 0.5):
            raise GenerationError("texture amplitude must lie in [0, 0.5)")
        if not (0.0 <= self.gray_fraction <= 1.0):
            raise GenerationError("gray fraction must lie in [0, 1]")
        if self.reflectance_range[0] <= 0.0:
            raise GenerationError("reflectances must be bounded away from 0")
        if self.field_kind not in ("uniform", "smooth"):
            raise GenerationError(f"unknown illumination field {self.field_kind!r}")


@dataclass(frozen=True)
class SceneTruth:
    illuminant: Illuminant
    gray_mask: np.ndarray
    reflectance: np.ndarray


def _patch_index_map(size, grid):
    h, w = size
    rows, cols = grid
    row_id = np.minimum(np.arange(h) * rows // h, rows - 1)
    col_id = np.minimum(np.arange(w) * cols // w, cols - 1)
    return row_id[:, None] * cols + col_id[None, :]


def make_scene(spec, seed=0):
    """Render a SceneSpec; returns (LinearImage, SceneTruth)."""
    rng = np.random.default_rng(seed)
    h, w = spec.size
    rows, cols = spec.grid
    n_patches = rows * cols

    n_gray = int(round(spec.gray_fraction * n_patches))
    if spec.gray_fraction > 0:
        n_gray = max(n_gray, 1)
    gray_ids = rng.choice(n_patches, size=n_gray, replace=False) if n_gray else np.empty(0, int)
    is_gray = np.zeros(n_patches, dtype=bool)
    is_gray[gray_ids] = True

    lo, hi = spec.reflectance_range
    refl = rng.uniform(lo, hi, size=(n_patches, 3))
    refl[is_gray] = refl[is_gray, :1]  # equal channels, exactly

    pid = _patch_index_map(spec.size, spec.grid)
    reflectance = refl[pid]
    gray_mask = is_gray[pid]

    if spec.texture_amplitude > 0 and n_gray:
        a = spec.texture_amplitude
        texture = 1.0 + rng.uniform(-a, a, size=(h, w))
        reflectance = reflectance * np.where(gray_mask, texture, 1.0)[:, :, None]

    e = spec.illuminant.e
    if spec.field_kind == "smooth":
        ramp = np.arange(w) / max(w - 1, 1) - 0.5
        signs = np.array([1.0, 0.0, -1.0])
        illum = e[None, None, :] * (1.0 + spec.field_strength * ramp[None, :, None] * signs)
    else:
        illum = np.broadcast_to(e, (h, w, 3)).copy()

    data = reflectance * illum
    if spec.noise_sigma > 0:
        data = np.clip(data + rng.normal(0.0, spec.noise_sigma * data.max(), data.shape), 0.0, None)

    peak = data.max()
    if peak <= 0:
        raise GenerationError("rendered scene is all-black")
    if spec.white_level is None:
        white = peak / 0.9
    else:
        white = spec.white_level
        if peak > 0.9 * white:
            raise GenerationError(
                f"scene peaks at {peak:g}, above 0.9 * white_level = {0.9 * white:g}")
    img = LinearImage(data, white)
    return img, SceneTruth(spec.illuminant, gray_mask, reflectance)


def sample_illuminant(rng, r_range=(0.2, 0.5), g_range=(0.2, 0.5), min_b=0.05):
    """Uniform chromaticity in r,g within the stated gamut, b = 1 - r - g >= min_b."""
    while True:
        r = rng.uniform(*r_range)
        g = rng.uniform(*g_range)
        b = 1.0 - r - g
        if b >= min_b:
            return Illuminant((r, g, b))


def make_dataset(n, out_dir, seed=0, *, size=(64, 64), grid=(4, 4),
                 gray_range=(0.2, 0.5), texture_range=(0.03, 0.1),
                 field_kind="uniform", field_strength=0.0):
    """Write n synthetic scenes as 16-bit PNGs plus a manifest CSV.

    Returns the Dataset re-read from the manifest. Deterministic per seed,
    byte-for-byte.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    manifest_path = os.path.join(out_dir, "manifest.csv")
    lines = ["image,er,eg,eb,polygons\n"]
    for i in range(n):
        illum = sample_illuminant(rng)
        spec = SceneSpec(
            size=size, grid=grid,
            gray_fraction=rng.uniform(*gray_range),
            texture_amplitude=rng.uniform(*texture_range),
            illuminant=illum,
            field_kind=field_kind, field_strength=field_strength,
        )
        scene_seed = int(rng.integers(0, 2 ** 63 - 1))
        img, truth = make_scene(spec, seed=scene_seed)
        fname = f"scene_{i:04d}.png"
        save_image(os.path.join(out_dir, fname), img)
        e = truth.illuminant.e
        lines.append(f"{fname},{e[0]:.17g},{e[1]:.17g},{e[2]:.17g},\n")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(lines)
    return load_manifest(manifest_path)
