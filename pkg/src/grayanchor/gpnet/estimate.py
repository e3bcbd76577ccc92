"""Illuminant estimation with a trained gray-pixel network."""

import numpy as np

from ..errors import ConfigError
from ..grayclassic import EXCLUDED, estimate_illuminant, select_gray
from .features import build_features, raw_feature_stack
from .net import CONSTRAINED_CHANNELS, RAW_CHANNELS, net_forward, net_forward_batch


def gpnet_grayness(img, params, mask=None):
    """Predicted grayness map with masked pixels EXCLUDED."""
    c_ins = params.input_channels
    if c_ins == CONSTRAINED_CHANNELS:
        out = net_forward(params, build_features(img))
    elif c_ins == RAW_CHANNELS:
        raw = raw_feature_stack(img.data, img.white_level)[None]
        out, _ = net_forward_batch(params, [raw, raw, raw], want_cache=False)
        out = out[0]
    else:
        raise ConfigError(f"cannot build features for pathway channels {c_ins}")
    if mask is not None:
        out = np.where(mask.valid, out, EXCLUDED)
    return out


def gpnet_estimate(img, params, k=None, frac=None, mask=None):
    """Top-K gray-pixel estimate: forward, select lowest grayness, average."""
    gray = gpnet_grayness(img, params, mask)
    pixels = select_gray(gray, k=k, frac=frac)
    return estimate_illuminant(img, pixels)
