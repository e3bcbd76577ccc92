"""Gray-pixel based color constancy toolkit.

Detect gray pixels with opponent-space detectors or a small learned network,
estimate scene illuminants from them, and benchmark everything against
classical Minkowski-framework baselines on real or synthetic datasets.
"""

from .baselines import (MinkowskiSpec, general_gray_world, gray_edge1,
                        gray_edge2, gray_world, minkowski_estimate,
                        shades_of_gray, white_patch)
from .errors import GrayAnchorError
from .evalbench import (ErrorStats, FoldSplit, MethodConfig, Report, kfold,
                        recovery_error, reproduction_error, run_benchmark,
                        summarize)
from .grayclassic import (EXCLUDED, PixelSet, estimate_illuminant,
                          grayness_gi, grayness_gp, select_gray)
from .gpnet import (FeatureStack, LossConfig, NetParams, TrainConfig,
                    binned_loss, build_features, gpnet_estimate,
                    gpnet_grayness, gt_grayness, init_params, load_params,
                    net_backward, net_forward, save_params, train)
from .imgio import (Dataset, DatasetEntry, Illuminant, LinearImage, Mask,
                    load_image, load_manifest, save_image, save_manifest,
                    valid_mask)
from .opponent import (LocalOpKind, LogImage, OpponentPlanes, color_opponent,
                       double_opponent, iim, local_op, log_transform)
from .synthlab import SceneSpec, SceneTruth, make_dataset, make_scene

__version__ = "0.1.0"
