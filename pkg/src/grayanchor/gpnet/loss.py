"""Per-pixel angular ground truth and the weighted histogram-binned loss.

The per-pixel term |O - G| / (min(O, G)^2 + delta) focuses learning on pixels
that either are gray or were predicted gray; binning by the ground-truth
grayness and averaging within bins balances the scarce near-gray pixels
against the chromatic majority.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, LossError

EXCLUDED = np.inf


@dataclass(frozen=True)
class LossConfig:
    delta: float = 0.001
    bins: int = 100
    cap: float = 20.0
    floor: float = 0.5

    def __post_init__(self):
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.bins < 1:
            raise ConfigError("need at least one bin")
        if not (self.cap > self.floor > 0):
            raise ConfigError("need cap > floor > 0")


def angles_to_vector(data, e):
    """Per-pixel recovery angle in degrees between RGB vectors and e.

    Zero-vector pixels are EXCLUDED (inf).
    """
    e = np.asarray(e, dtype=np.float64)
    e = e / np.linalg.norm(e)
    norms = np.linalg.norm(data, axis=2)
    dots = data @ e
    with np.errstate(invalid="ignore", divide="ignore"):
        cosv = np.clip(dots / norms, -1.0, 1.0)
    angles = np.degrees(np.arccos(cosv))
    return np.where(norms > 0, angles, EXCLUDED)


def gt_grayness(img, gt, cfg=None):
    """Ground-truth grayness map of a LinearImage against its illuminant.

    Raw angles are kept; the loss caps values at cfg.cap for bin assignment
    only.
    """
    return angles_to_vector(img.data, gt.e)


def binned_loss(pred, gt, cfg=None):
    """Weighted histogram-binned loss and its exact gradient w.r.t. pred.

    Pixels are assigned to equal-width bins of the ground-truth grayness over
    [0, cap] (values above cap fall into the last bin); the loss is the sum
    over non-empty bins of the mean per-pixel term. Pixels with
    |pred - gt| < floor contribute zero but still count toward their bin
    mean. The gradient uses subgradient 0 at the floor boundary and at
    pred == gt. EXCLUDED (non-finite) ground-truth pixels are skipped.
    """
    cfg = cfg or LossConfig()
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ConfigError(f"map shapes differ: {pred.shape} vs {gt.shape}")
    valid = np.isfinite(gt)
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise LossError("no valid pixels for the loss")

    d = pred - gt
    ad = np.abs(d)
    mind = np.minimum(pred, gt)
    with np.errstate(invalid="ignore"):
        term = np.where(ad < cfg.floor, 0.0, ad / (mind * mind + cfg.delta))

    width = cfg.cap / cfg.bins
    safe_gt = np.where(valid, gt, 0.0)
    idx = np.clip((safe_gt / width).astype(np.int64), 0, cfg.bins - 1)
    counts = np.bincount(idx[valid], minlength=cfg.bins)
    sums = np.bincount(idx[valid], weights=term[valid], minlength=cfg.bins)
    nonempty = counts > 0
    loss = float(np.sum(sums[nonempty] / counts[nonempty]))

    active = valid & (ad > cfg.floor)
    grad = np.zeros_like(pred)
    p_a = pred[active]
    g_a = gt[active]
    dterm = np.where(
        p_a > g_a,
        1.0 / (g_a * g_a + cfg.delta),
        -(2.0 * p_a * g_a - p_a * p_a + cfg.delta) / (p_a * p_a + cfg.delta) ** 2)
    grad[active] = dterm / counts[idx[active]]
    return loss, grad
