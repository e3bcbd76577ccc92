"""Model-constrained gray-pixel network: constrained input features, a small
convolutional regressor trained with a weighted histogram-binned loss, and
Top-K illuminant estimation."""

from .features import FeatureStack, build_features, raw_feature_stack
from .loss import LossConfig, binned_loss, gt_grayness
from .net import (CONSTRAINED_CHANNELS, RAW_CHANNELS, NetParams, init_params,
                  net_backward, net_forward, param_tensors)
from .checkpoint import load_params, save_params
from .train import TrainConfig, train
from .estimate import gpnet_estimate, gpnet_grayness

__all__ = [
    "FeatureStack", "build_features", "raw_feature_stack",
    "LossConfig", "binned_loss", "gt_grayness",
    "NetParams", "init_params", "net_forward", "net_backward", "param_tensors",
    "CONSTRAINED_CHANNELS", "RAW_CHANNELS",
    "load_params", "save_params",
    "TrainConfig", "train",
    "gpnet_estimate", "gpnet_grayness",
]
