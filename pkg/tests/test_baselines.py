"""Minkowski-framework estimators against brute-force oracles."""

import math

import numpy as np
import pytest

from grayanchor.baselines import (MinkowskiSpec, general_gray_world, gray_edge1,
                                  gray_edge2, gray_world, minkowski_estimate,
                                  shades_of_gray, white_patch)
from grayanchor.errors import ConfigError, EstimationError
from grayanchor.evalbench import recovery_error
from grayanchor.imgio import LinearImage, Mask

from conftest import constant_image, random_image


def test_gray_world_channel_means():
    data = np.zeros((16, 16, 3))
    data[:8] = (4.0, 2.0, 2.0)  # half the rows; means = (2, 1, 1)
    img = LinearImage(data, 4.0)
    est = minkowski_estimate(img, gray_world())
    np.testing.assert_allclose(est.e, np.array([2, 1, 1]) / np.sqrt(6), atol=1e-12)


def test_white_patch_maxima():
    data = np.full((16, 16, 3), 0.1)
    data[3, 3] = (1.0, 0.5, 0.5)
    data[5, 5] = (0.5, 2.0, 0.5)
    data[9, 9] = (0.5, 0.5, 4.0)
    img = LinearImage(data, 4.0)
    est = minkowski_estimate(img, white_patch())
    np.testing.assert_allclose(est.e, np.array([1, 2, 4]) / np.sqrt(21), atol=1e-12)


def test_shades_of_gray_brute_force(rng):
    img = random_image(rng, 16, 16)
    est = minkowski_estimate(img, shades_of_gray())
    want = np.array([np.mean(img.data[:, :, c] ** 6.0) ** (1 / 6.0) for c in range(3)])
    want /= np.linalg.norm(want)
    np.testing.assert_allclose(est.e, want, atol=1e-9)


def test_gray_edge_brute_force(rng):
    from grayanchor import kernels
    img = random_image(rng, 16, 16)
    est = minkowski_estimate(img, gray_edge1(p=2.0, sigma=1.0))
    want = []
    for c in range(3):
        sm = kernels.gaussian_blur(img.data[:, :, c], 1.0)
        dx, dy = kernels.gradient_xy(sm)
        v = np.hypot(dx, dy)
        want.append(np.mean(v ** 2.0) ** 0.5)
    want = np.array(want)
    want /= np.linalg.norm(want)
    np.testing.assert_allclose(est.e, want, atol=1e-12)


@pytest.mark.parametrize("factory", [gray_world, white_patch, shades_of_gray,
                                     general_gray_world, gray_edge1, gray_edge2])
def test_gain_equivariance(backend, rng, factory):
    img = random_image(rng, 20, 20)
    gains = rng.uniform(0.4, 2.5, 3)
    scaled = LinearImage(img.data * gains, img.white_level * float(gains.max()))
    e0 = minkowski_estimate(img, factory()).e
    e1 = minkowski_estimate(scaled, factory()).e
    want = e0 * gains
    want /= np.linalg.norm(want)
    np.testing.assert_allclose(e1, want, atol=1e-9)


def test_high_p_approaches_white_patch(rng):
    img = random_image(rng, 32, 32)
    sog = minkowski_estimate(img, shades_of_gray(p=64.0))
    wp = minkowski_estimate(img, white_patch())
    assert recovery_error(sog, wp) < 1.0


def test_derivative_orders_ignore_offsets(rng):
    img = random_image(rng, 20, 20, lo=0.2, hi=0.6)
    shifted = LinearImage(img.data + np.array([0.1, 0.2, 0.3]), img.white_level + 0.3)
    for factory in (gray_edge1, gray_edge2):
        e0 = minkowski_estimate(img, factory()).e
        e1 = minkowski_estimate(shifted, factory()).e
        np.testing.assert_allclose(e0, e1, atol=1e-9)


def test_mask_restricts_statistics():
    data = np.full((16, 16, 3), 0.2)
    data[0, 0] = (0.9, 0.1, 0.1)  # an outlier the mask removes
    img = LinearImage(data, 1.0)
    valid = np.ones((16, 16), dtype=bool)
    valid[0, 0] = False
    est = minkowski_estimate(img, white_patch(), Mask(valid))
    np.testing.assert_allclose(est.e, np.ones(3) / np.sqrt(3), atol=1e-12)


def test_empty_mask_errors():
    img = constant_image(16, 16, (0.5, 0.5, 0.5))
    with pytest.raises(EstimationError):
        minkowski_estimate(img, gray_world(), Mask(np.zeros((16, 16), dtype=bool)))


def test_black_image_errors():
    img = LinearImage(np.zeros((16, 16, 3)), 1.0)
    with pytest.raises(EstimationError):
        minkowski_estimate(img, gray_world())


def test_spec_validation():
    with pytest.raises(ConfigError):
        MinkowskiSpec(3, 1.0, 0.0)
    with pytest.raises(ConfigError):
        MinkowskiSpec(0, 0.5, 0.0)
    with pytest.raises(ConfigError):
        MinkowskiSpec(0, 1.0, -1.0)
    assert math.isinf(white_patch().p)
