"""Gray-Pixel and Grayness-Index detectors, gray-pixel selection, and
illuminant estimation from the selected set.

Grayness maps are float arrays where lower means grayer; pixels removed by
the contrast gate or a validity mask carry the EXCLUDED value (+inf) and
never participate in smoothing or selection.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DetectorError, EstimationError, SelectionError, UsageError
from .imgio import Illuminant
from .opponent import LocalOpKind, center_surround, color_opponent, local_op, log_transform

EXCLUDED = np.inf

GP_NORM_EPS = 1e-4
DEFAULT_FLAT_EPS = 1e-4
DEFAULT_SMOOTH_WINDOW = 7
GI_SIGMA = 5.0


@dataclass(frozen=True)
class PixelSet:
    """Selected pixel coordinates as an (K, 2) array of (x, y) pairs."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=np.int64).reshape(-1, 2))

    @property
    def count(self):
        return self.coords.shape[0]


def _finish_map(gray, excluded, smooth_window, what):
    gray = np.where(excluded, EXCLUDED, gray)
    if np.all(excluded):
        raise DetectorError(f"{what}: every pixel was excluded (flat image?)")
    if smooth_window and smooth_window > 1:
        valid = ~excluded
        sm = kernels.box_mean_valid(np.where(valid, gray, 0.0), valid, smooth_window)
        gray = np.where(valid, sm, EXCLUDED)
    return gray


def grayness_gp(img, variant="edge", mask=None, *, flat_eps=DEFAULT_FLAT_EPS,
                smooth_window=DEFAULT_SMOOTH_WINDOW):
    """Gray-Pixel grayness: spread of the per-channel illuminant-invariant
    measures, normalized by their mean magnitude.

    variant "edge" uses gradient magnitudes of the log channels, "std" a 3x3
    local standard deviation. Pixels whose mean invariant magnitude falls
    below flat_eps are EXCLUDED (the criterion needs local structure), as are
    pixels outside the validity mask. Valid values are then smoothed by a
    box mean over valid neighbours.
    """
    if variant == "edge":
        kind = LocalOpKind.gradient_magnitude()
    elif variant == "std":
        kind = LocalOpKind.local_std(3)
    else:
        raise UsageError(f"unknown gray-pixel variant {variant!r}")
    p = log_transform(img).planes
    m = np.stack([local_op(p[i], kind) for i in range(3)])
    mu = np.mean(np.abs(m), axis=0)
    # two-pass std: the naive E[x^2]-E[x]^2 form cancels catastrophically on
    # the near-identical per-channel measures of true gray pixels
    sd = np.std(m, axis=0)
    gray = sd / (mu + GP_NORM_EPS)
    excluded = mu < flat_eps
    if mask is not None:
        excluded |= ~mask.valid
    return _finish_map(gray, excluded, smooth_window, "gray-pixel")


def grayness_gi(img, mask=None, *, flat_eps=DEFAULT_FLAT_EPS,
                smooth_window=DEFAULT_SMOOTH_WINDOW, sigma=GI_SIGMA):
    """Grayness-Index: center-surround response of the channel-vs-luminance
    opponent planes phi_r and phi_b, combined by root-sum-of-squares.

    The contrast gate requires a center-surround response above flat_eps in
    every log channel (flat patches carry no spatial cue); gated and masked
    pixels are EXCLUDED. Valid values are box-mean smoothed.
    """
    log_img = log_transform(img)
    ops = color_opponent(log_img, "vs_luminance")
    d_r = center_surround(ops.phi_r, sigma)
    d_b = center_surround(ops.phi_b, sigma)
    gray = np.hypot(d_r, d_b)
    contrast = np.stack([np.abs(center_surround(pl, sigma)) for pl in log_img.planes[:3]])
    excluded = np.any(contrast <= flat_eps, axis=0)
    if mask is not None:
        excluded |= ~mask.valid
    return _finish_map(gray, excluded, smooth_window, "grayness-index")


def select_gray(gray_map, k=None, frac=None):
    """Pick the K non-EXCLUDED pixels with the smallest grayness.

    Exactly one of k or frac must be given; frac selects ceil(frac * valid)
    pixels. Ties are broken by row-major pixel order.
    """
    if (k is None) == (frac is None):
        raise UsageError("give exactly one of k or frac")
    gray_map = np.asarray(gray_map, dtype=np.float64)
    flat = gray_map.ravel()
    n_valid = int(np.isfinite(flat).sum())
    if frac is not None:
        if not 0.0 < frac <= 1.0:
            raise UsageError("frac must lie in (0, 1]")
        k = math.ceil(frac * n_valid)
    k = int(k)
    if k < 1:
        raise UsageError("k must be >= 1")
    if n_valid < k:
        raise SelectionError(f"need {k} valid pixels but only {n_valid} available")
    order = np.argsort(flat, kind="stable")[:k]
    ys, xs = np.unravel_index(order, gray_map.shape)
    return PixelSet(np.column_stack([xs, ys]))


def estimate_illuminant(img, pixels):
    """Mean RGB over the selected pixels, L2-normalized."""
    if pixels.count == 0:
        raise EstimationError("empty pixel set")
    xs = pixels.coords[:, 0]
    ys = pixels.coords[:, 1]
    e = img.data[ys, xs].mean(axis=0)
    if not np.any(e > 0):
        raise EstimationError("selected pixels sum to zero")
    return Illuminant(e)
