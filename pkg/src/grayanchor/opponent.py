"""Logarithmic transform and single/double opponent operators.

Every detector in the package is assembled from these pieces: a clamped log
transform over four channels (r, g, b and yellow = 0.5(r+g)), a family of
local difference operators, and the two orderings of spatial and chromatic
differencing.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError

LOG_EPS = 1e-5


@dataclass(frozen=True)
class LogImage:
    """Log-domain planes (log r, log g, log b, log y), shape (4, H, W)."""

    planes: np.ndarray

    @property
    def height(self):
        return self.planes.shape[1]

    @property
    def width(self):
        return self.planes.shape[2]


@dataclass(frozen=True)
class LocalOpKind:
    """A local difference operator: center-surround, gradient or local std."""

    kind: str
    sigma: float = 0.0
    window: int = 0

    def __post_init__(self):
        if self.kind == "center_surround":
            if self.sigma <= 0:
                raise ConfigError("center_surround needs sigma > 0")
        elif self.kind == "local_std":
            if self.window < 3 or self.window % 2 == 0:
                raise ConfigError("local_std needs an odd window >= 3")
        elif self.kind != "gradient_magnitude":
            raise ConfigError(f"unknown local operator {self.kind!r}")

    @classmethod
    def center_surround(cls, sigma):
        return cls("center_surround", sigma=float(sigma))

    @classmethod
    def gradient_magnitude(cls):
        return cls("gradient_magnitude")

    @classmethod
    def local_std(cls, window):
        return cls("local_std", window=int(window))


@dataclass(frozen=True)
class OpponentPlanes:
    """Chromatic opponent planes, tagged by variant.

    variant "rg_by": rg and by are set. variant "vs_luminance": phi_r, phi_g
    and phi_b hold each channel against the summed luminance channel.
    """

    variant: str
    rg: np.ndarray = None
    by: np.ndarray = None
    phi_r: np.ndarray = None
    phi_g: np.ndarray = None
    phi_b: np.ndarray = None


def log_transform(img):
    """Four clamped log planes of a LinearImage.

    Channels are clamped at LOG_EPS * white_level before the log so that all
    planes stay finite; the yellow plane is built from the clamped linear
    values.
    """
    floor = LOG_EPS * img.white_level
    clamped = np.maximum(img.data, floor)
    planes = np.empty((4, img.height, img.width))
    planes[0] = np.log(clamped[:, :, 0])
    planes[1] = np.log(clamped[:, :, 1])
    planes[2] = np.log(clamped[:, :, 2])
    planes[3] = np.log(0.5 * (clamped[:, :, 0] + clamped[:, :, 1]))
    return LogImage(planes)


def center_surround(a, sigma):
    """a - G_sigma * a with the DC level removed first.

    Subtracting a reference level (the corner pixel) before filtering makes
    the response on constant inputs exactly zero instead of accumulating
    kernel-normalization roundoff.
    """
    d = a - a[0, 0]
    return d - kernels.gaussian_blur(d, sigma)


def local_op(a, kind):
    """Apply a LocalOpKind to a 2-D map."""
    a = np.asarray(a, dtype=np.float64)
    if kind.kind == "center_surround":
        return center_surround(a, kind.sigma)
    if kind.kind == "gradient_magnitude":
        dx, dy = kernels.gradient_xy(a)
        return np.hypot(dx, dy)
    return kernels.local_std(a, kind.window)


def iim(log_img, kind):
    """Illuminant-invariant measures: the local operator on each log plane."""
    return np.stack([local_op(p, kind) for p in log_img.planes])


def color_opponent(log_img, variant):
    """Chromatic differencing of the log planes.

    "rg_by" forms log r - log g and log b - log y. "vs_luminance" compares
    each channel against the summed luminance of the clamped linear values.
    """
    p = log_img.planes
    if variant == "rg_by":
        return OpponentPlanes("rg_by", rg=p[0] - p[1], by=p[2] - p[3])
    if variant == "vs_luminance":
        lum = np.log(np.exp(p[0]) + np.exp(p[1]) + np.exp(p[2]))
        return OpponentPlanes("vs_luminance",
                              phi_r=p[0] - lum, phi_g=p[1] - lum, phi_b=p[2] - lum)
    raise ConfigError(f"unknown opponent variant {variant!r}")


def double_opponent(img, order, kind, combine="rss"):
    """Composite spatial+chromatic opponency as one non-negative map.

    order "spatial_first" applies the local operator per log channel and then
    differences r-g and b-y; "color_first" differences channels first and
    applies the operator to the two opponent planes. For the gradient
    operator the magnitude is taken after channel differencing in both
    orders, which keeps the linear part of the operator a true commuting
    factor. The two opponent responses are combined by root-sum-of-squares.
    """
    if combine != "rss":
        raise ConfigError(f"unknown combine rule {combine!r}")
    if order not in ("spatial_first", "color_first"):
        raise ConfigError(f"unknown order {order!r}")
    log_img = log_transform(img)
    p = log_img.planes

    if kind.kind == "gradient_magnitude":
        grads = [kernels.gradient_xy(pl) for pl in p]
        if order == "spatial_first":
            d_rg = np.hypot(grads[0][0] - grads[1][0], grads[0][1] - grads[1][1])
            d_by = np.hypot(grads[2][0] - grads[3][0], grads[2][1] - grads[3][1])
        else:
            gx, gy = kernels.gradient_xy(p[0] - p[1])
            d_rg = np.hypot(gx, gy)
            gx, gy = kernels.gradient_xy(p[2] - p[3])
            d_by = np.hypot(gx, gy)
    elif order == "spatial_first":
        m = iim(log_img, kind)
        d_rg = m[0] - m[1]
        d_by = m[2] - m[3]
    else:
        ops = color_opponent(log_img, "rg_by")
        d_rg = local_op(ops.rg, kind)
        d_by = local_op(ops.by, kind)
    return np.hypot(d_rg, d_by)
