"""Pure numpy/scipy kernel implementations (fallback backend)."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage


def gaussian_blur(a, kernel):
    # scipy "reflect" is the half-sample symmetric extension (a b c | c b a)
    tmp = ndimage.correlate1d(a, kernel, axis=0, mode="reflect")
    return ndimage.correlate1d(tmp, kernel, axis=1, mode="reflect")


def conv3x3(xpad, w, b):
    n, c, hp, wp = xpad.shape
    o = w.shape[0]
    h, wd = hp - 2, wp - 2
    win = sliding_window_view(xpad, (3, 3), axis=(2, 3))  # (N, C, H, W, 3, 3)
    cols = np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5))
    cols = cols.reshape(n * h * wd, c * 9)
    y = cols @ w.reshape(o, c * 9).T
    y += b
    return np.ascontiguousarray(y.reshape(n, h, wd, o).transpose(0, 3, 1, 2))


def conv3x3_weight_grad(xpad, gy):
    n, c, hp, wp = xpad.shape
    o = gy.shape[1]
    h, wd = hp - 2, wp - 2
    win = sliding_window_view(xpad, (3, 3), axis=(2, 3))
    cols = np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5))
    cols = cols.reshape(n * h * wd, c * 9)
    g = np.ascontiguousarray(gy.transpose(0, 2, 3, 1)).reshape(n * h * wd, o)
    return (g.T @ cols).reshape(o, c, 3, 3)


def local_std(a, window):
    m = ndimage.uniform_filter(a, window, mode="nearest")
    m2 = ndimage.uniform_filter(a * a, window, mode="nearest")
    return np.sqrt(np.clip(m2 - m * m, 0.0, None))


def gradient_xy(a):
    ax = np.pad(a, ((0, 0), (1, 1)), mode="edge")
    ay = np.pad(a, ((1, 1), (0, 0)), mode="edge")
    dx = 0.5 * (ax[:, 2:] - ax[:, :-2])
    dy = 0.5 * (ay[2:, :] - ay[:-2, :])
    return dx, dy


def laplacian(a):
    p = np.pad(a, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * a


def box_mean_valid(a, valid, window):
    vals = np.where(valid, a, 0.0)
    cnt = ndimage.uniform_filter(valid.astype(np.float64), window, mode="constant")
    tot = ndimage.uniform_filter(vals, window, mode="constant")
    out = np.zeros_like(a)
    # uniform_filter returns sums scaled by 1/window^2; the scale cancels in
    # the ratio. Threshold at half a count to stay clear of roundoff.
    np.divide(tot, cnt, out=out, where=cnt > 0.5 / (window * window))
    return out
