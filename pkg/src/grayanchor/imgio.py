"""Linear image decoding, validity masks, and manifest-based dataset ingestion.

Images are 8- or 16-bit PNG or uncompressed TIFF files in RGB channel order.
A dataset is described by a manifest CSV with header
``image,er,eg,eb,polygons``; the polygons column holds exclusion polygons
separated by ``|``, vertices by ``;``, coordinates as ``x:y`` in pixel units
with the origin at the top-left. Relative image paths are resolved against
the manifest's directory.
"""

import csv
import os
from dataclasses import dataclass, field

import cv2
import numpy as np

from .errors import (DecodeError, DimensionError, EstimationError,
                     ManifestError, MaskError)

MIN_SIDE = 16


@dataclass(frozen=True)
class Illuminant:
    """Positive RGB illuminant direction, stored unit L2 norm."""

    e: np.ndarray

    def __init__(self, e):
        e = np.asarray(e, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(e)):
            raise EstimationError("illuminant has non-finite components")
        norm = float(np.linalg.norm(e))
        if norm == 0.0:
            raise EstimationError("illuminant is the zero vector")
        e = e / norm
        if np.any(e <= 0.0):
            raise EstimationError("illuminant components must all be positive")
        object.__setattr__(self, "e", e)

    def __iter__(self):
        return iter(self.e)


@dataclass(frozen=True)
class LinearImage:
    """Non-negative linear RGB radiance samples in [0, white_level]."""

    data: np.ndarray
    white_level: float

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 3:
            raise DimensionError(f"expected (H, W, 3) data, got {data.shape}")
        if data.shape[0] < MIN_SIDE or data.shape[1] < MIN_SIDE:
            raise DimensionError(
                f"image {data.shape[1]}x{data.shape[0]} is below the "
                f"{MIN_SIDE}x{MIN_SIDE} minimum")
        if not np.all(np.isfinite(data)):
            raise DecodeError("image contains non-finite values")
        if data.min() < 0.0:
            raise DecodeError("image contains negative values")
        if self.white_level <= 0.0:
            raise DecodeError("white_level must be positive")
        object.__setattr__(self, "data", data)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class Mask:
    """Per-pixel validity; dimensions match the image it annotates."""

    valid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "valid", np.asarray(self.valid, dtype=bool))

    @property
    def height(self):
        return self.valid.shape[0]

    @property
    def width(self):
        return self.valid.shape[1]


@dataclass(frozen=True)
class DatasetEntry:
    image_path: str
    gt_illuminant: Illuminant
    exclusion_polygons: tuple = ()


@dataclass(frozen=True)
class Dataset:
    entries: tuple
    name: str = ""

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def load_image(path, black_level=0.0):
    """Decode a PNG/TIFF file into a LinearImage, subtracting the black level.

    Stored samples become max(sample - black_level, 0) and the white level is
    (2^bitdepth - 1) - black_level.
    """
    if black_level < 0:
        raise DecodeError("black_level must be >= 0")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DecodeError(f"cannot decode image file {path}")
    if raw.dtype == np.uint8:
        full = 255.0
    elif raw.dtype == np.uint16:
        full = 65535.0
    else:
        raise DecodeError(f"unsupported sample type {raw.dtype} in {path}")
    if raw.ndim == 2:
        raw = np.stack([raw] * 3, axis=2)
    if raw.ndim != 3 or raw.shape[2] < 3:
        raise DecodeError(f"expected an RGB image in {path}")
    rgb = raw[:, :, 2::-1].astype(np.float64)  # BGR(A) -> RGB
    data = np.maximum(rgb - black_level, 0.0)
    white = full - black_level
    if white <= 0:
        raise DecodeError("black_level leaves no usable range")
    return LinearImage(data, white)


def save_image(path, img):
    """Write a LinearImage as a 16-bit PNG (or uncompressed TIFF by suffix)."""
    scaled = np.clip(img.data / img.white_level, 0.0, 1.0) * 65535.0
    samples = np.rint(scaled).astype(np.uint16)
    bgr = samples[:, :, ::-1]
    params = []
    if str(path).lower().endswith((".tif", ".tiff")):
        params = [cv2.IMWRITE_TIFF_COMPRESSION, 1]
    if not cv2.imwrite(str(path), bgr, params):
        raise DecodeError(f"cannot write image file {path}")


def _point_in_polygon(px, py, poly):
    # even-odd rule ray cast toward +x
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > py) != (y2 > py):
            xi = (x2 - x1) * (py - y1) / (y2 - y1) + x1
            if px < xi:
                inside = not inside
    return inside


def _polygon_mask(shape, polygons):
    h, w = shape
    hit = np.zeros((h, w), dtype=bool)
    ys, xs = np.mgrid[0:h, 0:w]
    for poly in polygons:
        poly = np.asarray(poly, dtype=np.float64)
        if poly.ndim != 2 or poly.shape[0] < 3 or poly.shape[1] != 2:
            raise MaskError("exclusion polygon needs at least 3 (x, y) vertices")
        inside = np.zeros((h, w), dtype=bool)
        n = poly.shape[0]
        for i in range(n):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % n]
            crosses = (y1 > ys) != (y2 > ys)
            with np.errstate(divide="ignore", invalid="ignore"):
                xi = np.where(crosses, (x2 - x1) * (ys - y1) / (y2 - y1) + x1, np.inf)
            inside ^= crosses & (xs < xi)
        hit |= inside
    return hit


def valid_mask(img, polygons=(), dark_frac=0.02, sat_frac=0.98):
    """Mark pixels usable for estimation.

    A pixel is valid iff its max channel lies strictly between
    dark_frac*white_level and sat_frac*white_level and its integer-coordinate
    center falls inside no exclusion polygon (even-odd rule).
    """
    if not (0.0 <= dark_frac < sat_frac <= 1.0):
        raise MaskError("need 0 <= dark_frac < sat_frac <= 1")
    peak = img.data.max(axis=2)
    valid = (peak < sat_frac * img.white_level) & (peak > dark_frac * img.white_level)
    if polygons:
        valid &= ~_polygon_mask(valid.shape, polygons)
    return Mask(valid)


def _format_polygons(polygons):
    return "|".join(";".join(f"{x:g}:{y:g}" for x, y in poly) for poly in polygons)


def _parse_polygons(cell):
    if not cell:
        return ()
    polys = []
    for chunk in cell.split("|"):
        verts = []
        for pair in chunk.split(";"):
            parts = pair.split(":")
            if len(parts) != 2:
                raise ManifestError(f"bad polygon vertex {pair!r}")
            try:
                verts.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ManifestError(f"bad polygon vertex {pair!r}") from exc
        if len(verts) < 3:
            raise ManifestError("polygon needs at least 3 vertices")
        polys.append(tuple(verts))
    return tuple(polys)


def load_manifest(path):
    """Read a manifest CSV into a Dataset; image existence is not checked."""
    base = os.path.dirname(os.path.abspath(str(path)))
    entries = []
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ManifestError(f"cannot open manifest {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:4]] != ["image", "er", "eg", "eb"]:
            raise ManifestError(f"manifest {path} must start with header image,er,eg,eb[,polygons]")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 4:
                raise ManifestError(f"{path}:{lineno}: expected at least 4 columns")
            try:
                e = np.array([float(row[1]), float(row[2]), float(row[3])])
            except ValueError as exc:
                raise ManifestError(f"{path}:{lineno}: bad illuminant") from exc
            if np.any(e <= 0):
                raise ManifestError(f"{path}:{lineno}: illuminant components must be positive")
            polygons = _parse_polygons(row[4].strip()) if len(row) > 4 else ()
            img_path = row[0].strip()
            if not os.path.isabs(img_path):
                img_path = os.path.join(base, img_path)
            entries.append(DatasetEntry(img_path, Illuminant(e), polygons))
    name = os.path.splitext(os.path.basename(str(path)))[0]
    return Dataset(tuple(entries), name=name)


def save_manifest(path, dataset, relative_to=None):
    """Write a Dataset back to manifest CSV (LF endings, UTF-8)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("image,er,eg,eb,polygons\n")
        for entry in dataset.entries:
            img = entry.image_path
            if relative_to is not None:
                img = os.path.relpath(img, relative_to)
            e = entry.gt_illuminant.e
            poly = _format_polygons(entry.exclusion_polygons)
            fh.write(f"{img},{e[0]:.17g},{e[1]:.17g},{e[2]:.17g},{poly}\n")
