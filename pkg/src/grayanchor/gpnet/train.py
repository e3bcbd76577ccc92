"""Seed-deterministic minibatch training of the gray-pixel network.

Per-sample augmentation follows a fixed draw order (crop fraction, crop
origin, flip, three channel gains), so a seed pins the whole run; kernels
are deterministic, which makes retrained parameters bit-identical across
reruns. The learning rate warms up from lr0 and follows a sin^2 bell that
peaks mid-training; updates use adaptive moment estimation.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, TrainingError
from ..imgio import Illuminant, load_image, valid_mask
from .features import features_from_array, raw_feature_stack
from .loss import EXCLUDED, LossConfig, angles_to_vector, binned_loss
from .net import (CONSTRAINED_CHANNELS, RAW_CHANNELS, init_params,
                  net_backward, net_forward_batch, param_tensors)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    lr0: float = 1e-4
    lr_peak: float = None  # None -> 10 * lr0
    epochs: int = 200
    batch_size: int = 16
    crop_range: tuple = (0.10, 1.00)
    resize: int = 256
    flip_prob: float = 0.5
    scale_range: tuple = (0.6, 1.4)
    top_k: int = 5000
    seed: int = 0
    black_level: float = 0.0
    dark_frac: float = 0.02
    sat_frac: float = 0.98
    feature_mode: str = "constrained"  # "constrained" | "raw"

    def __post_init__(self):
        if not (0.0 < self.crop_range[0] <= self.crop_range[1] <= 1.0):
            raise ConfigError("crop_range must be within (0, 1]")
        if self.scale_range[0] <= 0 or self.scale_range[1] < self.scale_range[0]:
            raise ConfigError("scale_range must be positive and ordered")
        if self.resize < 16:
            raise ConfigError("resize must be at least 16")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.feature_mode not in ("constrained", "raw"):
            raise ConfigError(f"unknown feature mode {self.feature_mode!r}")

    @property
    def peak(self):
        return 10.0 * self.lr0 if self.lr_peak is None else self.lr_peak


def resize_bilinear(arr, out_h, out_w):
    """Bilinear resample of (H, W) or (H, W, C) with half-pixel centers."""
    h, w = arr.shape[:2]
    sy = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    sx = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    sy = np.clip(sy, 0.0, h - 1.0)
    sx = np.clip(sx, 0.0, w - 1.0)
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (sy - y0)[:, None]
    fx = (sx - x0)[None, :]
    if arr.ndim == 3:
        fy = fy[:, :, None]
        fx = fx[:, :, None]
    tl = arr[np.ix_(y0, x0)]
    tr = arr[np.ix_(y0, x1)]
    bl = arr[np.ix_(y1, x0)]
    br = arr[np.ix_(y1, x1)]
    top = tl + (tr - tl) * fx
    bot = bl + (br - bl) * fx
    return top + (bot - top) * fy


def resize_nearest(arr, out_h, out_w):
    h, w = arr.shape[:2]
    sy = np.clip(np.rint((np.arange(out_h) + 0.5) * (h / out_h) - 0.5).astype(np.int64), 0, h - 1)
    sx = np.clip(np.rint((np.arange(out_w) + 0.5) * (w / out_w) - 0.5).astype(np.int64), 0, w - 1)
    return arr[np.ix_(sy, sx)]


def _augment(data, valid, e, rng, cfg):
    """One training sample: crop, resize, flip, per-channel gains."""
    h, w = data.shape[:2]
    shorter = min(h, w)
    frac = rng.uniform(cfg.crop_range[0], cfg.crop_range[1])
    side = int(round(frac * shorter))
    side = min(max(side, 2), shorter)
    x0 = int(rng.integers(0, w - side + 1))
    y0 = int(rng.integers(0, h - side + 1))
    flip_draw = rng.random()
    scales = rng.uniform(cfg.scale_range[0], cfg.scale_range[1], size=3)

    crop = data[y0:y0 + side, x0:x0 + side]
    vcrop = valid[y0:y0 + side, x0:x0 + side]
    img = resize_bilinear(crop, cfg.resize, cfg.resize)
    v = resize_nearest(vcrop, cfg.resize, cfg.resize)
    if flip_draw < cfg.flip_prob:
        img = img[:, ::-1]
        v = v[:, ::-1]
    img = np.ascontiguousarray(img * scales)
    e_aug = Illuminant(e * scales).e
    return img, np.ascontiguousarray(v), e_aug


def _blocks_for(data, white_level, mode):
    if mode == "constrained":
        feats = features_from_array(data, white_level)
        return [feats.f1[None, None], feats.f2[None], feats.f3[None]]
    raw = raw_feature_stack(data, white_level)[None]
    return [raw, raw, raw]


def _schedule(t, total, lr0, peak):
    return lr0 + (peak - lr0) * math.sin(math.pi * t / total) ** 2


def train(data, cfg=None, loss_cfg=None, seed=None, history=None):
    """Train on a Dataset and return the learned NetParams.

    history, if given, receives the mean minibatch loss of each epoch.
    Raises TrainingError with the failing step index if the loss goes
    non-finite.
    """
    cfg = cfg or TrainConfig()
    loss_cfg = loss_cfg or LossConfig()
    if len(data) == 0:
        raise ConfigError("training dataset is empty")
    if seed is None:
        seed = cfg.seed
    rng = np.random.default_rng(seed)

    samples = []
    for entry in data.entries:
        img = load_image(entry.image_path, cfg.black_level)
        mask = valid_mask(img, entry.exclusion_polygons, cfg.dark_frac, cfg.sat_frac)
        samples.append((img.data, img.white_level, entry.gt_illuminant.e, mask.valid))

    channels = CONSTRAINED_CHANNELS if cfg.feature_mode == "constrained" else RAW_CHANNELS
    params = init_params(rng, channels)
    tensors = [t for _, t in param_tensors(params)]
    m_state = [np.zeros_like(t) for t in tensors]
    v_state = [np.zeros_like(t) for t in tensors]

    n = len(samples)
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    total_steps = cfg.epochs * steps_per_epoch
    step = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for s in range(steps_per_epoch):
            batch = order[s * cfg.batch_size:(s + 1) * cfg.batch_size]
            xs = [[], [], []]
            gts = []
            for i in batch:
                arr, wl, e, valid = samples[i]
                aug, v_aug, e_aug = _augment(arr, valid, e, rng, cfg)
                for j, block in enumerate(_blocks_for(aug, wl, cfg.feature_mode)):
                    xs[j].append(block[0])
                gt_map = angles_to_vector(aug, e_aug)
                gts.append(np.where(v_aug, gt_map, EXCLUDED))
            blocks = [np.stack(x) for x in xs]
            out, cache = net_forward_batch(params, blocks, want_cache=True)

            bsz = len(batch)
            upstream = np.empty_like(out)
            losses = []
            for bi in range(bsz):
                li, gi = binned_loss(out[bi], gts[bi], loss_cfg)
                losses.append(li)
                upstream[bi] = gi / bsz
            batch_loss = float(np.mean(losses))
            if not math.isfinite(batch_loss):
                raise TrainingError(f"non-finite loss at step {step}", step=step)
            epoch_losses.append(batch_loss)

            grads = net_backward(params, cache, upstream)
            lr = _schedule(step, total_steps, cfg.lr0, cfg.peak)
            step += 1
            for k, (t, gk) in enumerate(zip(tensors, grads)):
                m_state[k] = ADAM_BETA1 * m_state[k] + (1 - ADAM_BETA1) * gk
                v_state[k] = ADAM_BETA2 * v_state[k] + (1 - ADAM_BETA2) * gk * gk
                mhat = m_state[k] / (1 - ADAM_BETA1 ** step)
                vhat = v_state[k] / (1 - ADAM_BETA2 ** step)
                t -= lr * mhat / (np.sqrt(vhat) + ADAM_EPS)
        if history is not None:
            history.append(float(np.mean(epoch_losses)))
    return params
