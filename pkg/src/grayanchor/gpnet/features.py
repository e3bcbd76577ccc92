"""Constrained input features for the gray-pixel network.

Three blocks feed the three network pathways: the summed intensity channel,
the chromatic opponent pair (reflectance of a gray pixel cancels there), and
the center-surround log responses of the four channels (locally uniform
illumination cancels there). The last two are invariant to global
per-channel gains; the intensity block deliberately is not.
"""

from dataclasses import dataclass

import numpy as np

from ..imgio import LinearImage
from ..opponent import center_surround, log_transform

F3_SIGMA = 5.0


@dataclass(frozen=True)
class FeatureStack:
    f1: np.ndarray  # (H, W)
    f2: np.ndarray  # (2, H, W)
    f3: np.ndarray  # (4, H, W)

    @property
    def shape(self):
        return self.f1.shape


def features_from_array(data, white_level):
    """FeatureStack from a raw (H, W, 3) array plus its white level."""
    img = _ArrayView(data, white_level)
    f1 = data.sum(axis=2) / white_level
    p = log_transform(img).planes
    f2 = np.stack([p[0] - p[1], p[2] - p[3]])
    f3 = np.stack([center_surround(pl, F3_SIGMA) for pl in p])
    return FeatureStack(f1, f2, f3)


def build_features(img):
    """FeatureStack of a LinearImage."""
    return features_from_array(img.data, img.white_level)


def raw_feature_stack(data, white_level):
    """Ablation input: the white-level-scaled linear image for each pathway."""
    return np.ascontiguousarray(data.transpose(2, 0, 1)) / white_level


class _ArrayView:
    """Duck-typed stand-in for LinearImage used on augmented crops, which may
    be smaller than the LinearImage minimum size."""

    def __init__(self, data, white_level):
        self.data = data
        self.white_level = white_level
        self.height = data.shape[0]
        self.width = data.shape[1]
