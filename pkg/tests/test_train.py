"""Training loop: determinism, overfit sanity, divergence guard, and the
Top-K estimator around a (tiny) trained network."""

import numpy as np
import pytest

from grayanchor.errors import ConfigError, SelectionError, TrainingError
from grayanchor.gpnet import TrainConfig, gpnet_estimate, gpnet_grayness, train
from grayanchor.gpnet.net import init_params, param_tensors
from grayanchor.gpnet.train import resize_bilinear, resize_nearest
from grayanchor.grayclassic import select_gray
from grayanchor.imgio import Illuminant, LinearImage, Mask, load_image
from grayanchor.synthlab import make_dataset


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("tinyds")
    return make_dataset(4, out, seed=7, size=(24, 24), grid=(2, 2),
                        gray_range=(0.4, 0.6))


def test_train_deterministic_bit_identical(tiny_dataset):
    cfg = TrainConfig(epochs=2, batch_size=2, resize=16, seed=3)
    p1 = train(tiny_dataset, cfg)
    p2 = train(tiny_dataset, cfg)
    for (_, a), (_, b) in zip(param_tensors(p1), param_tensors(p2)):
        np.testing.assert_array_equal(a, b)


def test_train_changes_params(tiny_dataset):
    cfg = TrainConfig(epochs=1, batch_size=4, resize=16, seed=3, lr_peak=1e-4)
    trained = train(tiny_dataset, cfg)
    fresh = init_params(np.random.default_rng(3))
    diffs = [np.abs(a - b).max() for (_, a), (_, b)
             in zip(param_tensors(trained), param_tensors(fresh))]
    assert max(diffs) > 0
    assert all(np.isfinite(d) for d in diffs)


def test_overfit_loss_decreases(tiny_dataset):
    # memorization protocol: fixed images, no augmentation, constant small rate
    hist = []
    cfg = TrainConfig(epochs=20, batch_size=4, resize=16, seed=1,
                      lr0=2e-5, lr_peak=2e-5, crop_range=(1.0, 1.0),
                      flip_prob=0.0, scale_range=(1.0, 1.0))
    train(tiny_dataset, cfg, history=hist)
    assert len(hist) == 20
    ma = np.convolve(hist, np.ones(5) / 5, mode="valid")
    assert np.all(np.diff(ma) < 0)


def test_train_divergence_reports_step(tiny_dataset):
    cfg = TrainConfig(epochs=50, batch_size=4, resize=16, seed=1,
                      lr0=1e150, lr_peak=1e150)
    with pytest.raises(TrainingError) as exc:
        train(tiny_dataset, cfg)
    assert exc.value.step is not None
    assert exc.value.exit_code == 3


def test_train_rejects_empty_dataset():
    from grayanchor.imgio import Dataset
    with pytest.raises(ConfigError):
        train(Dataset(()), TrainConfig(epochs=1))


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(crop_range=(0.0, 1.0))
    with pytest.raises(ConfigError):
        TrainConfig(resize=8)
    with pytest.raises(ConfigError):
        TrainConfig(feature_mode="ablated")
    assert TrainConfig(lr0=2e-4).peak == pytest.approx(2e-3)


def test_raw_feature_mode_trains(tiny_dataset):
    cfg = TrainConfig(epochs=1, batch_size=4, resize=16, seed=2, feature_mode="raw")
    params = train(tiny_dataset, cfg)
    assert params.input_channels == (3, 3, 3)
    img = load_image(tiny_dataset[0].image_path)
    est = gpnet_estimate(img, params, k=5)
    assert abs(np.linalg.norm(est.e) - 1) < 1e-12


def test_gpnet_estimate_k1_is_argmin_pixel(tiny_dataset):
    img = load_image(tiny_dataset[0].image_path)
    params = init_params(np.random.default_rng(0))
    gray = gpnet_grayness(img, params)
    y, x = np.unravel_index(np.argmin(gray), gray.shape)
    est = gpnet_estimate(img, params, k=1)
    want = img.data[y, x] / np.linalg.norm(img.data[y, x])
    np.testing.assert_allclose(est.e, want, atol=1e-12)


def test_gpnet_estimate_mask_forces_next_ranked(tiny_dataset):
    img = load_image(tiny_dataset[0].image_path)
    params = init_params(np.random.default_rng(0))
    gray = gpnet_grayness(img, params)
    top = select_gray(gray, k=20)
    valid = np.ones(gray.shape, dtype=bool)
    valid[top.coords[:, 1], top.coords[:, 0]] = False
    masked_gray = gpnet_grayness(img, params, Mask(valid))
    nxt = select_gray(masked_gray, k=20)
    a = {tuple(c) for c in top.coords.tolist()}
    b = {tuple(c) for c in nxt.coords.tolist()}
    assert not a & b
    # and the masked picks are exactly ranks 21..40 of the unmasked map
    want = {tuple(c) for c in select_gray(gray, k=40).coords.tolist()} - a
    assert b == want


def test_gpnet_estimate_insufficient_pixels(tiny_dataset):
    img = load_image(tiny_dataset[0].image_path)
    params = init_params(np.random.default_rng(0))
    with pytest.raises(SelectionError):
        gpnet_estimate(img, params, k=10, mask=Mask(np.zeros((24, 24), dtype=bool)))


def test_resize_bilinear_identity_and_mean(rng):
    a = rng.normal(0, 1, (12, 9))
    np.testing.assert_allclose(resize_bilinear(a, 12, 9), a, atol=1e-12)
    # 2x downscale of a constant stays constant
    c = np.full((16, 16), 3.3)
    np.testing.assert_allclose(resize_bilinear(c, 8, 8), 3.3, atol=1e-12)
    up = resize_bilinear(a, 24, 18)
    assert up.shape == (24, 18)
    assert abs(up.mean() - a.mean()) < 0.05


def test_resize_nearest_preserves_bool():
    m = np.zeros((8, 8), dtype=bool)
    m[:4] = True
    out = resize_nearest(m, 4, 4)
    assert out.dtype == bool
    assert out[:2].all() and not out[2:].any()
