"""Hot numeric kernels with a numba fast path and a pure numpy/scipy fallback.

The backend is chosen once at import from the environment flag
``GRAYANCHOR_NUMBA`` ("0" forces the numpy fallback) and can be switched at
runtime with :func:`set_backend` (used by the tests and the benchmark
script). Both backends implement the same boundary conventions:

* Gaussian filtering and 3x3 convolution use half-sample symmetric borders
  (``a b c | c b a``), the extension that makes filtering with a symmetric
  kernel self-adjoint.
* Gradient, Laplacian and local standard deviation replicate edge pixels.
* Box means average over the valid in-bounds neighbours only.
"""

import os

import numpy as np

from . import numpy_impl

try:
    from . import numba_impl
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    numba_impl = None
    _HAVE_NUMBA = False

_BACKENDS = {"numpy": numpy_impl}
if _HAVE_NUMBA:
    _BACKENDS["numba"] = numba_impl

if os.environ.get("GRAYANCHOR_NUMBA", "1") == "0" or not _HAVE_NUMBA:
    _active = "numpy"
else:
    _active = "numba"


def available_backends():
    return tuple(sorted(_BACKENDS))


def get_backend():
    return _active


def set_backend(name):
    """Select the kernel backend ("numba" or "numpy")."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    _active = name


def gaussian_kernel(sigma):
    """Normalized 1-D Gaussian, truncated at 3*sigma (radius round(3*sigma))."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = int(3.0 * sigma + 0.5)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(a, sigma):
    """Separable Gaussian blur of a 2-D map, symmetric borders."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _BACKENDS[_active].gaussian_blur(a, gaussian_kernel(sigma))


def conv3x3(xpad, w, b):
    """Batched 3x3 cross-correlation.

    xpad: (N, C, H+2, W+2) already padded input; w: (O, C, 3, 3); b: (O,).
    Returns (N, O, H, W).
    """
    return _BACKENDS[_active].conv3x3(xpad, w, b)


def conv3x3_weight_grad(xpad, gy):
    """Gradient of conv3x3 w.r.t. the kernel tensor; returns (O, C, 3, 3)."""
    return _BACKENDS[_active].conv3x3_weight_grad(xpad, gy)


def local_std(a, window):
    """Population standard deviation over a window x window patch, replicated borders."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _BACKENDS[_active].local_std(a, window)


def gradient_xy(a):
    """Central-difference gradients (dx, dy) with replicated borders."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _BACKENDS[_active].gradient_xy(a)


def laplacian(a):
    """4-neighbour Laplacian with replicated borders."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _BACKENDS[_active].laplacian(a)


def box_mean_valid(a, valid, window):
    """Box mean over valid in-bounds neighbours; 0 where the window has none."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=np.bool_)
    return _BACKENDS[_active].box_mean_valid(a, valid, window)
