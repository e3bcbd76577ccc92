"""Numba-compiled kernel implementations (default backend).

All prange loops write disjoint output elements and reduce serially inside a
single thread, so results are bit-identical regardless of thread count.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _fold(i, n):
    # half-sample symmetric extension: ... a b c | c b a ...
    j = i % (2 * n)
    if j >= n:
        j = 2 * n - 1 - j
    return j


@njit(cache=True, parallel=True)
def _gaussian_blur(a, kernel):
    h, w = a.shape
    r = (kernel.shape[0] - 1) // 2
    tmp = np.empty((h, w))
    for y in prange(h):
        for x in range(w):
            acc = 0.0
            for t in range(-r, r + 1):
                acc += kernel[t + r] * a[y, _fold(x + t, w)]
            tmp[y, x] = acc
    out = np.empty((h, w))
    for y in prange(h):
        for x in range(w):
            acc = 0.0
            for t in range(-r, r + 1):
                acc += kernel[t + r] * tmp[_fold(y + t, h), x]
            out[y, x] = acc
    return out


def gaussian_blur(a, kernel):
    return _gaussian_blur(a, kernel)


@njit(cache=True, parallel=True, fastmath=True)
def _conv3x3(xpad, w, b, out):
    n, o, h, wd = out.shape
    c = xpad.shape[1]
    for no in prange(n * o):
        ni = no // o
        oi = no % o
        for y in range(h):
            row = out[ni, oi, y]
            for x in range(wd):
                row[x] = b[oi]
            for ci in range(c):
                x0 = xpad[ni, ci, y]
                x1 = xpad[ni, ci, y + 1]
                x2 = xpad[ni, ci, y + 2]
                w00 = w[oi, ci, 0, 0]; w01 = w[oi, ci, 0, 1]; w02 = w[oi, ci, 0, 2]
                w10 = w[oi, ci, 1, 0]; w11 = w[oi, ci, 1, 1]; w12 = w[oi, ci, 1, 2]
                w20 = w[oi, ci, 2, 0]; w21 = w[oi, ci, 2, 1]; w22 = w[oi, ci, 2, 2]
                for x in range(wd):
                    row[x] += (w00 * x0[x] + w01 * x0[x + 1] + w02 * x0[x + 2]
                               + w10 * x1[x] + w11 * x1[x + 1] + w12 * x1[x + 2]
                               + w20 * x2[x] + w21 * x2[x + 1] + w22 * x2[x + 2])


def conv3x3(xpad, w, b):
    n, c, hp, wp = xpad.shape
    out = np.empty((n, w.shape[0], hp - 2, wp - 2))
    _conv3x3(xpad, w, b, out)
    return out


@njit(cache=True, parallel=True, fastmath=True)
def _conv3x3_weight_grad(xpad, gy, gw):
    n, o, h, wd = gy.shape
    c = xpad.shape[1]
    for oc in prange(o * c):
        oi = oc // c
        ci = oc % c
        s00 = s01 = s02 = s10 = s11 = s12 = s20 = s21 = s22 = 0.0
        for ni in range(n):
            for y in range(h):
                g = gy[ni, oi, y]
                x0 = xpad[ni, ci, y]
                x1 = xpad[ni, ci, y + 1]
                x2 = xpad[ni, ci, y + 2]
                for x in range(wd):
                    gv = g[x]
                    s00 += gv * x0[x]; s01 += gv * x0[x + 1]; s02 += gv * x0[x + 2]
                    s10 += gv * x1[x]; s11 += gv * x1[x + 1]; s12 += gv * x1[x + 2]
                    s20 += gv * x2[x]; s21 += gv * x2[x + 1]; s22 += gv * x2[x + 2]
        gw[oi, ci, 0, 0] = s00; gw[oi, ci, 0, 1] = s01; gw[oi, ci, 0, 2] = s02
        gw[oi, ci, 1, 0] = s10; gw[oi, ci, 1, 1] = s11; gw[oi, ci, 1, 2] = s12
        gw[oi, ci, 2, 0] = s20; gw[oi, ci, 2, 1] = s21; gw[oi, ci, 2, 2] = s22


def conv3x3_weight_grad(xpad, gy):
    gw = np.empty((gy.shape[1], xpad.shape[1], 3, 3))
    _conv3x3_weight_grad(xpad, gy, gw)
    return gw


@njit(cache=True, parallel=True)
def _local_std(a, window):
    h, w = a.shape
    r = window // 2
    out = np.empty((h, w))
    area = float(window * window)
    for y in prange(h):
        for x in range(w):
            s = 0.0
            s2 = 0.0
            for dy in range(-r, r + 1):
                yy = min(max(y + dy, 0), h - 1)
                for dx in range(-r, r + 1):
                    xx = min(max(x + dx, 0), w - 1)
                    v = a[yy, xx]
                    s += v
                    s2 += v * v
            m = s / area
            var = s2 / area - m * m
            out[y, x] = np.sqrt(var) if var > 0.0 else 0.0
    return out


def local_std(a, window):
    return _local_std(a, window)


@njit(cache=True, parallel=True)
def _gradient_xy(a):
    h, w = a.shape
    dx = np.empty((h, w))
    dy = np.empty((h, w))
    for y in prange(h):
        for x in range(w):
            xl = max(x - 1, 0)
            xr = min(x + 1, w - 1)
            yl = max(y - 1, 0)
            yr = min(y + 1, h - 1)
            dx[y, x] = 0.5 * (a[y, xr] - a[y, xl])
            dy[y, x] = 0.5 * (a[yr, x] - a[yl, x])
    return dx, dy


def gradient_xy(a):
    return _gradient_xy(a)


@njit(cache=True, parallel=True)
def _laplacian(a):
    h, w = a.shape
    out = np.empty((h, w))
    for y in prange(h):
        for x in range(w):
            up = a[max(y - 1, 0), x]
            dn = a[min(y + 1, h - 1), x]
            lf = a[y, max(x - 1, 0)]
            rt = a[y, min(x + 1, w - 1)]
            out[y, x] = up + dn + lf + rt - 4.0 * a[y, x]
    return out


def laplacian(a):
    return _laplacian(a)


@njit(cache=True, parallel=True)
def _box_mean_valid(a, valid, window):
    h, w = a.shape
    r = window // 2
    out = np.zeros((h, w))
    for y in prange(h):
        for x in range(w):
            s = 0.0
            cnt = 0
            for dy in range(max(y - r, 0), min(y + r + 1, h)):
                for dx in range(max(x - r, 0), min(x + r + 1, w)):
                    if valid[dy, dx]:
                        s += a[dy, dx]
                        cnt += 1
            if cnt > 0:
                out[y, x] = s / cnt
    return out


def box_mean_valid(a, valid, window):
    return _box_mean_valid(a, valid, window)
