import numpy as np
import pytest

from grayanchor import kernels
from grayanchor.imgio import Illuminant, LinearImage


def sym_index(i, n):
    """Half-sample symmetric extension index."""
    j = i % (2 * n)
    return j if j < n else 2 * n - 1 - j


def blur_reference(a, sigma):
    """Dense separable Gaussian with symmetric extension, explicit loops."""
    k = kernels.gaussian_kernel(sigma)
    r = (len(k) - 1) // 2
    h, w = a.shape
    tmp = np.zeros_like(a)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for t in range(-r, r + 1):
                acc += k[t + r] * a[y, sym_index(x + t, w)]
            tmp[y, x] = acc
    out = np.zeros_like(a)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for t in range(-r, r + 1):
                acc += k[t + r] * tmp[sym_index(y + t, h), x]
            out[y, x] = acc
    return out


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    """Run a test under each kernel backend."""
    old = kernels.get_backend()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(old)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_image(data, white_level=1.0):
    return LinearImage(np.asarray(data, dtype=np.float64), white_level)


def constant_image(h, w, rgb, white_level=1.0):
    data = np.empty((h, w, 3))
    data[:] = np.asarray(rgb, dtype=np.float64)
    return LinearImage(data, white_level)


def random_image(rng, h=24, w=24, white_level=1.0, lo=0.05, hi=0.95):
    return LinearImage(rng.uniform(lo, hi, (h, w, 3)) * white_level, white_level)


@pytest.fixture
def ill():
    return Illuminant
