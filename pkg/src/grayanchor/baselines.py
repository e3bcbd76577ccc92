"""Classical statistical estimators under one Minkowski-norm framework.

Each estimator is a triple (derivative order n, norm p, smoothing sigma):
per channel it computes (mean over valid pixels of |D^n (G_sigma * I)|^p)^(1/p)
and L2-normalizes the resulting vector. p = inf takes the channel maximum.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, EstimationError
from .imgio import Illuminant


@dataclass(frozen=True)
class MinkowskiSpec:
    derivative_order: int = 0
    p: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.derivative_order not in (0, 1, 2):
            raise ConfigError("derivative order must be 0, 1 or 2")
        if not (self.p >= 1.0):
            raise ConfigError("Minkowski norm p must be >= 1 (math.inf allowed)")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")


def gray_world():
    return MinkowskiSpec(0, 1.0, 0.0)


def white_patch():
    return MinkowskiSpec(0, math.inf, 0.0)


def shades_of_gray(p=6.0):
    return MinkowskiSpec(0, p, 0.0)


def general_gray_world(p=13.0, sigma=2.0):
    return MinkowskiSpec(0, p, sigma)


def gray_edge1(p=1.0, sigma=1.0):
    return MinkowskiSpec(1, p, sigma)


def gray_edge2(p=1.0, sigma=1.0):
    return MinkowskiSpec(2, p, sigma)


def minkowski_estimate(img, spec, mask=None):
    """Evaluate a MinkowskiSpec estimator on an image."""
    valid = None if mask is None else mask.valid
    if valid is not None and not valid.any():
        raise EstimationError("no valid pixels for Minkowski estimate")
    e = np.empty(3)
    for c in range(3):
        chan = img.data[:, :, c]
        if spec.sigma > 0:
            chan = kernels.gaussian_blur(chan, spec.sigma)
        if spec.derivative_order == 1:
            dx, dy = kernels.gradient_xy(chan)
            v = np.hypot(dx, dy)
        elif spec.derivative_order == 2:
            v = np.abs(kernels.laplacian(chan))
        else:
            v = np.abs(chan)
        if valid is not None:
            v = v[valid]
        if math.isinf(spec.p):
            e[c] = v.max()
        else:
            e[c] = np.mean(v ** spec.p) ** (1.0 / spec.p)
    if not np.any(e > 0):
        raise EstimationError("Minkowski statistic is zero in every channel")
    return Illuminant(e)
