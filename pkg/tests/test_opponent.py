"""Log transform, local operators, and opponent-order properties."""

import numpy as np
import pytest

from grayanchor import kernels
from grayanchor.imgio import LinearImage
from grayanchor.opponent import (LOG_EPS, LocalOpKind, center_surround,
                                 color_opponent, double_opponent, iim,
                                 local_op, log_transform)

from conftest import constant_image, random_image


def test_log_transform_constant():
    img = constant_image(16, 16, (0.7, 0.7, 0.7))
    p = log_transform(img).planes
    np.testing.assert_allclose(p, np.log(0.7), atol=1e-15)


def test_log_transform_clamps_zero():
    data = np.full((16, 16, 3), 1.0)
    data[0, 0] = (0.0, 1.0, 1.0)
    p = log_transform(LinearImage(data, 1.0)).planes
    assert p[0, 0, 0] == pytest.approx(np.log(1e-5))
    assert p[1, 0, 0] == 0.0
    assert p[2, 0, 0] == 0.0
    # yellow from the clamped linear values
    assert p[3, 0, 0] == pytest.approx(np.log(0.5 * (LOG_EPS + 1.0)))
    assert p[3, 0, 0] == pytest.approx(np.log(0.5), abs=1e-4)


def test_log_transform_yellow_consistency(rng):
    img = random_image(rng)
    p = log_transform(img).planes
    want = np.log(0.5 * (np.exp(p[0]) + np.exp(p[1])))
    np.testing.assert_allclose(p[3], want, atol=1e-9)


def test_log_transform_scaling_shift(rng):
    img = random_image(rng, lo=0.2)
    k = 3.7
    p0 = log_transform(img).planes
    p1 = log_transform(LinearImage(img.data * k, img.white_level * k)).planes
    np.testing.assert_allclose(p1 - p0, np.log(k), atol=1e-12)


@pytest.mark.parametrize("kind", [LocalOpKind.center_surround(2.0),
                                  LocalOpKind.gradient_magnitude(),
                                  LocalOpKind.local_std(3)])
def test_local_op_annihilates_constants(backend, kind):
    out = local_op(np.full((14, 14), 3.25), kind)
    if kind.kind == "center_surround":
        assert np.all(out == 0.0)  # exact, by DC removal
    else:
        np.testing.assert_allclose(out, 0.0, atol=1e-12)


def test_center_surround_impulse(backend):
    a = np.zeros((15, 15))
    a[7, 7] = 1.0
    out = local_op(a, LocalOpKind.center_surround(1.0))
    k = kernels.gaussian_kernel(1.0)
    center_weight = k[(len(k) - 1) // 2] ** 2  # separable 2-D center tap
    assert out[7, 7] == pytest.approx(1.0 - center_weight, abs=1e-12)


def test_gradient_of_ramp():
    x = np.tile(np.arange(16, dtype=np.float64), (16, 1))
    out = local_op(x, LocalOpKind.gradient_magnitude())
    np.testing.assert_allclose(out[:, 1:-1], 1.0, atol=1e-12)


def test_local_std_shift_invariant(backend, rng):
    a = rng.normal(0, 1, (12, 12))
    k = LocalOpKind.local_std(5)
    np.testing.assert_allclose(local_op(a, k), local_op(a + 100.0, k), atol=1e-9)


def test_iim_gain_invariance(backend, rng):
    img = random_image(rng, lo=0.2)
    gains = np.array([2.0, 0.5, 1.3])
    scaled = LinearImage(img.data * gains, img.white_level * 2.0)
    for kind in (LocalOpKind.center_surround(3.0), LocalOpKind.gradient_magnitude()):
        a = iim(log_transform(img), kind)
        b = iim(log_transform(scaled), kind)
        np.testing.assert_allclose(a[:3], b[:3], atol=1e-9)


def test_iim_constant_image_zero():
    maps = iim(log_transform(constant_image(16, 16, (0.3, 0.5, 0.2))),
               LocalOpKind.center_surround(2.0))
    np.testing.assert_allclose(maps, 0.0, atol=1e-12)


def test_iim_two_patch_profile_matches_1d_oracle(backend):
    # vertical edge: log plane is 0 on the left half, 1 on the right
    h, w = 20, 20
    plane = np.zeros((h, w))
    plane[:, w // 2:] = 1.0
    sigma = 5.0
    out = local_op(plane, LocalOpKind.center_surround(sigma))
    # rows are identical; compare one row against an explicit 1-D convolution
    k = kernels.gaussian_kernel(sigma)
    r = (len(k) - 1) // 2

    def sym(i, n):
        j = i % (2 * n)
        return j if j < n else 2 * n - 1 - j

    row = plane[0]
    want = np.empty(w)
    for x in range(w):
        want[x] = row[x] - sum(k[t + r] * row[sym(x + t, w)] for t in range(-r, r + 1))
    np.testing.assert_allclose(out[3], want, atol=1e-12)
    # antisymmetric across the edge; zero well away from it
    mid = w // 2
    np.testing.assert_allclose(out[5, mid - 3], -out[5, mid + 2], atol=1e-9)


def test_color_opponent_gray_pixel():
    ops = color_opponent(log_transform(constant_image(16, 16, (0.4, 0.4, 0.4))), "rg_by")
    np.testing.assert_allclose(ops.rg, 0.0, atol=1e-12)
    np.testing.assert_allclose(ops.by, 0.0, atol=1e-12)
    phi = color_opponent(log_transform(constant_image(16, 16, (0.4, 0.4, 0.4))), "vs_luminance")
    for plane in (phi.phi_r, phi.phi_g, phi.phi_b):
        np.testing.assert_allclose(plane, -np.log(3.0), atol=1e-12)


def test_color_opponent_hand_values():
    ops = color_opponent(log_transform(constant_image(16, 16, (2.0, 1.0, 1.0), 2.0)), "rg_by")
    np.testing.assert_allclose(ops.rg, np.log(2.0), atol=1e-12)
    np.testing.assert_allclose(ops.by, -np.log(1.5), atol=1e-12)


def test_color_opponent_gain_shifts_by_constant(rng):
    img = random_image(rng, lo=0.2)
    gains = np.array([1.7, 0.6, 2.2])
    a = color_opponent(log_transform(img), "rg_by")
    b = color_opponent(log_transform(LinearImage(img.data * gains, img.white_level)),
                       "rg_by")
    # rg/by shift by per-channel constants under any channel gains
    np.testing.assert_allclose(b.rg - a.rg, np.log(gains[0] / gains[1]), atol=1e-9)
    # the luminance-opponent planes shift by a constant under a scalar gain
    # (a sum of channels does not factor under per-channel gains)
    pa = color_opponent(log_transform(img), "vs_luminance")
    pb = color_opponent(log_transform(LinearImage(img.data * 2.6, img.white_level * 2.6)),
                        "vs_luminance")
    for x, y in ((pa.phi_r, pb.phi_r), (pa.phi_g, pb.phi_g), (pa.phi_b, pb.phi_b)):
        d = y - x
        np.testing.assert_allclose(d, d[0, 0], atol=1e-9)


def test_double_opponent_gray_image_zero(backend):
    img = constant_image(18, 18, (0.6, 0.3, 0.3))  # gray scene under gain (2,1,1)
    for order in ("spatial_first", "color_first"):
        out = double_opponent(img, order, LocalOpKind.center_surround(3.0))
        np.testing.assert_allclose(out, 0.0, atol=1e-12)


@pytest.mark.parametrize("kind", [LocalOpKind.center_surround(3.0),
                                  LocalOpKind.gradient_magnitude()])
def test_double_opponent_order_equivalence(backend, rng, kind):
    for _ in range(5):
        img = random_image(rng, h=20, w=17, lo=0.1)
        a = double_opponent(img, "spatial_first", kind)
        b = double_opponent(img, "color_first", kind)
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_double_opponent_gain_invariance(backend, rng):
    # the yellow channel is a sum of r and g, so exact invariance needs a
    # shared r/g gain; b is free
    img = random_image(rng, lo=0.15)
    gains = np.array([1.8, 1.8, 0.6])
    scaled = LinearImage(img.data * gains, img.white_level)
    for kind in (LocalOpKind.center_surround(3.0), LocalOpKind.gradient_magnitude()):
        a = double_opponent(img, "spatial_first", kind)
        b = double_opponent(scaled, "spatial_first", kind)
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_double_opponent_chromatic_edge_positive(backend):
    data = np.full((16, 16, 3), 0.2)
    data[:, :8, 0] = 0.8  # red left half
    data[:, 8:, 1] = 0.8  # green right half
    img = LinearImage(data, 1.0)
    out = double_opponent(img, "color_first", LocalOpKind.center_surround(2.0))
    assert out[8, 7] > 0.1
    assert out[8, 8] > 0.1


def test_double_opponent_std_kind_nonnegative(backend, rng):
    img = random_image(rng)
    out = double_opponent(img, "color_first", LocalOpKind.local_std(3))
    assert np.all(out >= 0)
