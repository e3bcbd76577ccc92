"""Angular-error metrics, summary statistics, cross-validation folds, and the
benchmark runner with its CSV report.

Report CSV: header ``image,method,recovery_deg,reproduction_deg`` followed by
one row per image (4-decimal fixed format, ``nan`` for failures), then a
summary block of ``#STATS,`` lines carrying median, mean, trimean, best-25%
and worst-25% for each metric plus the failure count.
"""

import concurrent.futures
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .baselines import (MinkowskiSpec, general_gray_world, gray_edge1,
                        gray_edge2, gray_world, minkowski_estimate,
                        shades_of_gray, white_patch)
from .errors import (ConfigError, GrayAnchorError, MetricError, SplitError,
                     StatsError)
from .grayclassic import grayness_gi, grayness_gp, select_gray, estimate_illuminant
from .gpnet import TrainConfig, gpnet_estimate, gpnet_grayness, load_params, train
from .imgio import Dataset, Illuminant, load_image, valid_mask


@dataclass(frozen=True)
class ErrorStats:
    median: float
    mean: float
    trimean: float
    best25_mean: float
    worst25_mean: float


@dataclass(frozen=True)
class FoldSplit:
    folds: tuple  # tuple of int index arrays

    @property
    def k(self):
        return len(self.folds)


def _as_vector(v):
    if isinstance(v, Illuminant):
        return v.e
    return np.asarray(v, dtype=np.float64).reshape(3)


def recovery_error(a, b):
    """Angle in degrees between two illuminant vectors."""
    va, vb = _as_vector(a), _as_vector(b)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise MetricError("zero-length illuminant vector")
    cosv = float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))
    return math.degrees(math.acos(cosv))


def reproduction_error(est, gt):
    """Angle between the componentwise ratio gt/est and the achromatic axis."""
    ve, vg = _as_vector(est), _as_vector(gt)
    if np.any(ve <= 0):
        raise MetricError("estimate must be strictly positive for reproduction error")
    ratio = vg / ve
    return recovery_error(ratio, np.ones(3))


def _quantile(sorted_vals, q):
    # linear interpolation at position q * (n - 1)
    n = len(sorted_vals)
    pos = q * (n - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def summarize(errors):
    """Five-number benchmark statistics of a list of angular errors."""
    vals = np.sort(np.asarray(list(errors), dtype=np.float64))
    if vals.size == 0:
        raise StatsError("cannot summarize an empty error list")
    if not np.all(np.isfinite(vals)):
        raise StatsError("error list contains non-finite values")
    q1 = _quantile(vals, 0.25)
    med = _quantile(vals, 0.5)
    q3 = _quantile(vals, 0.75)
    k = math.ceil(vals.size / 4)
    return ErrorStats(
        median=float(med),
        mean=float(vals.mean()),
        trimean=float((q1 + 2 * med + q3) / 4),
        best25_mean=float(vals[:k].mean()),
        worst25_mean=float(vals[-k:].mean()),
    )


def kfold(data, k, seed=0):
    """Seeded shuffle then round-robin assignment into k folds."""
    n = len(data)
    if k < 1 or k > n:
        raise SplitError(f"cannot split {n} entries into {k} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return FoldSplit(tuple(np.sort(perm[i::k]) for i in range(k)))


# -- method registry ---------------------------------------------------------

MINKOWSKI_METHODS = {
    "gray-world": gray_world,
    "white-patch": white_patch,
    "shades-of-gray": shades_of_gray,
    "general-gray-world": general_gray_world,
    "gray-edge1": gray_edge1,
    "gray-edge2": gray_edge2,
}
DETECTOR_METHODS = ("gray-pixel-edge", "gray-pixel-std", "grayness-index")
LEARNED_METHODS = ("gpnet",)
ALL_METHODS = tuple(MINKOWSKI_METHODS) + DETECTOR_METHODS + LEARNED_METHODS


@dataclass(frozen=True)
class MethodConfig:
    """An estimator id plus the knobs it understands."""

    name: str
    frac: float = 0.001
    k: int = None  # absolute pixel count; overrides frac
    p: float = None  # Minkowski norm override
    sigma: float = None  # Minkowski smoothing override
    checkpoint: str = None  # pre-trained gpnet parameters
    train_cfg: TrainConfig = None
    dark_frac: float = 0.02
    sat_frac: float = 0.98

    def __post_init__(self):
        if self.name not in ALL_METHODS:
            raise ConfigError(f"unknown method {self.name!r}; know {sorted(ALL_METHODS)}")


def _minkowski_spec(method):
    factory = MINKOWSKI_METHODS[method.name]
    spec = factory()
    if method.p is not None:
        spec = replace(spec, p=method.p)
    if method.sigma is not None:
        spec = replace(spec, sigma=method.sigma)
    return spec


def _select_args(method):
    if method.k is not None:
        return {"k": method.k}
    return {"frac": method.frac}


def grayness_map_for(method, img, mask, params=None):
    """Grayness map for map-producing methods (detectors and gpnet)."""
    if method.name == "gray-pixel-edge":
        return grayness_gp(img, "edge", mask)
    if method.name == "gray-pixel-std":
        return grayness_gp(img, "std", mask)
    if method.name == "grayness-index":
        return grayness_gi(img, mask)
    if method.name == "gpnet":
        return gpnet_grayness(img, params, mask)
    raise ConfigError(f"method {method.name!r} does not produce a grayness map")


def estimate_with(method, img, mask, params=None):
    """Run one estimator on one image."""
    if method.name in MINKOWSKI_METHODS:
        return minkowski_estimate(img, _minkowski_spec(method), mask)
    if method.name in DETECTOR_METHODS:
        gray = grayness_map_for(method, img, mask)
        pixels = select_gray(gray, **_select_args(method))
        return estimate_illuminant(img, pixels)
    if method.name == "gpnet":
        if params is None:
            raise ConfigError("gpnet needs trained parameters")
        return gpnet_estimate(img, params, mask=mask, **_select_args(method))
    raise ConfigError(f"unknown method {method.name!r}")


@dataclass(frozen=True)
class Report:
    method: str
    rows: tuple  # (image name, recovery or nan, reproduction or nan)
    stats_recovery: ErrorStats
    stats_reproduction: ErrorStats
    failures: int

    def to_csv(self):
        lines = ["image,method,recovery_deg,reproduction_deg"]
        for name, rec, rep in self.rows:
            lines.append(f"{name},{self.method},{rec:.4f},{rep:.4f}")
        for label, st in (("recovery_deg", self.stats_recovery),
                          ("reproduction_deg", self.stats_reproduction)):
            lines.append(
                f"#STATS,{label},{st.median:.4f},{st.mean:.4f},{st.trimean:.4f},"
                f"{st.best25_mean:.4f},{st.worst25_mean:.4f}")
        lines.append(f"#STATS,failures,{self.failures}")
        return "\n".join(lines) + "\n"


def _eval_entry(entry, method, params):
    img = load_image(entry.image_path, 0.0)
    mask = valid_mask(img, entry.exclusion_polygons, method.dark_frac, method.sat_frac)
    est = estimate_with(method, img, mask, params)
    rec = recovery_error(est, entry.gt_illuminant)
    rep = reproduction_error(est, entry.gt_illuminant)
    return rec, rep


def run_benchmark(data, method, folds=None, out_path=None, threads=1):
    """Evaluate a method over a dataset and build (optionally write) a Report.

    Learned methods without a fixed checkpoint require a FoldSplit: the model
    is trained on k-1 folds and tested on the held-out fold, and the
    per-image errors are concatenated in dataset order.
    """
    n = len(data)
    params_for = [None] * n
    if method.name in LEARNED_METHODS:
        if method.checkpoint is not None:
            params = load_params(method.checkpoint)
            params_for = [params] * n
        else:
            if folds is None:
                raise ConfigError(f"{method.name} needs --folds or a checkpoint")
            cfg = method.train_cfg or TrainConfig()
            for fold in folds.folds:
                train_idx = np.setdiff1d(np.arange(n), fold)
                subset = Dataset(tuple(data.entries[i] for i in train_idx),
                                 name=f"{data.name}-fold")
                params = train(subset, cfg)
                for i in fold:
                    params_for[i] = params

    def job(i):
        entry = data.entries[i]
        try:
            return _eval_entry(entry, method, params_for[i])
        except GrayAnchorError:
            return (math.nan, math.nan)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(n)))
    else:
        results = [job(i) for i in range(n)]

    rows = []
    rec_errors, rep_errors = [], []
    failures = 0
    for entry, (rec, rep) in zip(data.entries, results):
        rows.append((os.path.basename(entry.image_path), rec, rep))
        if math.isnan(rec) or math.isnan(rep):
            failures += 1
        else:
            rec_errors.append(rec)
            rep_errors.append(rep)
    report = Report(
        method=method.name,
        rows=tuple(rows),
        stats_recovery=summarize(rec_errors),
        stats_reproduction=summarize(rep_errors),
        failures=failures,
    )
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_csv())
    return report
