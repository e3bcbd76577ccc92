"""The gray-pixel network: three 5-layer CONV+PReLU pathways, per-plane
standardization, a 5-layer CONV+ReLU fusion stack, fixed Gaussian smoothing
and a non-negativity clamp. Forward and exact reverse-mode backward are
implemented over float64 batches (N, C, H, W); convolutions use same-size
3x3 kernels with half-sample symmetric padding.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import ConfigError

PATHWAY_WIDTH = 32
PATHWAY_DEPTH = 5
FUSION_WIDTHS = (96, 64, 32, 16, 8, 1)
SIGMA_OUT = 5.0
STD_EPS = 1e-6
CONSTRAINED_CHANNELS = (1, 2, 4)
RAW_CHANNELS = (3, 3, 3)
MAX_PARAMS = 300_000


@dataclass
class NetParams:
    """All learnable tensors plus the fixed output smoothing sigma."""

    pathway_w: list  # [3][5] arrays (out, in, 3, 3)
    pathway_b: list  # [3][5] arrays (out,)
    pathway_a: list  # [3][5] PReLU slopes (out,)
    fusion_w: list   # [5] arrays (out, in, 3, 3)
    fusion_b: list   # [5] arrays (out,)
    sigma_out: float = SIGMA_OUT

    @property
    def input_channels(self):
        return tuple(w[0].shape[1] for w in self.pathway_w)

    def n_params(self):
        return sum(t.size for _, t in param_tensors(self))


def param_tensors(params):
    """Learnable tensors in their canonical (checkpoint/optimizer) order."""
    out = []
    for p in range(3):
        for l in range(PATHWAY_DEPTH):
            out.append((f"p{p}.l{l}.w", params.pathway_w[p][l]))
            out.append((f"p{p}.l{l}.b", params.pathway_b[p][l]))
            out.append((f"p{p}.l{l}.a", params.pathway_a[p][l]))
    for l in range(len(FUSION_WIDTHS) - 1):
        out.append((f"fus.l{l}.w", params.fusion_w[l]))
        out.append((f"fus.l{l}.b", params.fusion_b[l]))
    return out


def init_params(rng, input_channels=CONSTRAINED_CHANNELS, sigma_out=SIGMA_OUT):
    """He-style random initialization; PReLU slopes start at 0.25."""
    pw, pb, pa = [], [], []
    for c_in in input_channels:
        ws, bs, slopes = [], [], []
        chans = [c_in] + [PATHWAY_WIDTH] * PATHWAY_DEPTH
        for l in range(PATHWAY_DEPTH):
            fan_in = chans[l] * 9
            ws.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(chans[l + 1], chans[l], 3, 3)))
            bs.append(np.zeros(chans[l + 1]))
            slopes.append(np.full(chans[l + 1], 0.25))
        pw.append(ws)
        pb.append(bs)
        pa.append(slopes)
    fw, fb = [], []
    for l in range(len(FUSION_WIDTHS) - 1):
        fan_in = FUSION_WIDTHS[l] * 9
        fw.append(rng.normal(0.0, np.sqrt(2.0 / fan_in),
                             size=(FUSION_WIDTHS[l + 1], FUSION_WIDTHS[l], 3, 3)))
        fb.append(np.zeros(FUSION_WIDTHS[l + 1]))
    # start the logits clearly positive: the output smoothing nearly averages
    # the map, and a negative mean would leave the clamp (and its gradient)
    # stuck at zero for the whole image
    fb[-1][:] = 1.0
    params = NetParams(pw, pb, pa, fw, fb, sigma_out=float(sigma_out))
    n = params.n_params()
    if n >= MAX_PARAMS:
        raise ConfigError(f"parameter count {n} exceeds the {MAX_PARAMS} budget")
    return params


def _pad(x):
    # symmetric 1-pixel pad, hand-rolled (np.pad is a hotspot at these sizes)
    n, c, h, w = x.shape
    out = np.empty((n, c, h + 2, w + 2))
    core = out[:, :, 1:h + 1, 1:w + 1]
    core[:] = x
    out[:, :, 0, 1:w + 1] = x[:, :, 0]
    out[:, :, h + 1, 1:w + 1] = x[:, :, h - 1]
    out[:, :, :, 0] = out[:, :, :, 1]
    out[:, :, :, w + 1] = out[:, :, :, w]
    return out


def _conv(x, w, b):
    return kernels.conv3x3(_pad(x), w, b)


def _conv_input_grad(gy, w):
    """Gradient w.r.t. the unpadded conv input (adjoint of pad + conv)."""
    n, o, h, wd = gy.shape
    c = w.shape[1]
    gyp = np.zeros((n, o, h + 4, wd + 4))
    gyp[:, :, 2:h + 2, 2:wd + 2] = gy
    wt = np.ascontiguousarray(w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    gxp = kernels.conv3x3(gyp, wt, np.zeros(c))  # grad w.r.t. padded input
    gxp[:, :, 1, :] += gxp[:, :, 0, :]
    gxp[:, :, h, :] += gxp[:, :, h + 1, :]
    core = gxp[:, :, 1:h + 1, :]
    core[:, :, :, 1] += core[:, :, :, 0]
    core[:, :, :, wd] += core[:, :, :, wd + 1]
    return core[:, :, :, 1:wd + 1]


def _prelu(z, a):
    return np.where(z > 0, z, a[None, :, None, None] * z)


def _standardize(x):
    mu = x.mean(axis=(2, 3), keepdims=True)
    xc = x - mu
    var = np.mean(xc * xc, axis=(2, 3), keepdims=True)
    istd = 1.0 / np.sqrt(var + STD_EPS)
    return xc * istd, istd


def _gauss_batch(x, sigma):
    out = np.empty_like(x)
    for n in range(x.shape[0]):
        out[n] = kernels.gaussian_blur(x[n], sigma)
    return out


def _forward(params, blocks, want_cache):
    shapes = {b.shape[2:] for b in blocks}
    if len(shapes) != 1:
        raise ConfigError("feature blocks disagree on spatial size")
    for b, w in zip(blocks, params.pathway_w):
        if b.shape[1] != w[0].shape[1]:
            raise ConfigError(
                f"feature block has {b.shape[1]} channels, parameters expect {w[0].shape[1]}")
    cache = {"blocks": blocks, "pre": [], "fus_pre": []} if want_cache else None

    outs = []
    for p in range(3):
        h = blocks[p]
        pres = []
        for l in range(PATHWAY_DEPTH):
            z = _conv(h, params.pathway_w[p][l], params.pathway_b[p][l])
            if want_cache:
                pres.append(z)
            h = _prelu(z, params.pathway_a[p][l])
        if want_cache:
            cache["pre"].append(pres)
        outs.append(h)

    cat = np.concatenate(outs, axis=1)
    xhat, istd = _standardize(cat)
    if want_cache:
        cache["xhat"] = xhat
        cache["istd"] = istd

    g = xhat
    n_fusion = len(FUSION_WIDTHS) - 1
    for l in range(n_fusion):
        z = _conv(g, params.fusion_w[l], params.fusion_b[l])
        if want_cache:
            cache["fus_pre"].append(z)
        g = np.maximum(z, 0.0) if l < n_fusion - 1 else z

    sm = _gauss_batch(g[:, 0], params.sigma_out)
    if want_cache:
        cache["sm"] = sm
    return np.maximum(sm, 0.0), cache


def net_forward(params, feats, want_cache=False):
    """Predicted grayness map (H, W) for one FeatureStack; lower = grayer."""
    blocks = [feats.f1[None, None], feats.f2[None], feats.f3[None]]
    out, cache = _forward(params, blocks, want_cache)
    return (out[0], cache) if want_cache else out[0]


def net_forward_batch(params, blocks, want_cache=False):
    """Batched forward over pre-stacked feature blocks [(N,c1,H,W), ...]."""
    return _forward(params, blocks, want_cache)


def net_backward(params, cache, upstream):
    """Exact gradients of the forward pass w.r.t. every learnable tensor.

    upstream: (N, H, W) gradient of the scalar objective w.r.t. the clamped
    output. Returns a list of arrays matching param_tensors order.
    """
    if cache is None:
        raise ConfigError("net_backward needs the cache from a forward pass")
    sm = cache["sm"]
    gsm = upstream * (sm > 0)
    # the Gaussian layer with symmetric borders is self-adjoint
    glog = _gauss_batch(gsm, params.sigma_out)[:, None]

    n_fusion = len(FUSION_WIDTHS) - 1
    fus_gw = [None] * n_fusion
    fus_gb = [None] * n_fusion
    g = glog
    for l in range(n_fusion - 1, -1, -1):
        z = cache["fus_pre"][l]
        dz = g if l == n_fusion - 1 else g * (z > 0)
        if l == 0:
            layer_in = cache["xhat"]
        else:
            prev = cache["fus_pre"][l - 1]
            layer_in = np.maximum(prev, 0.0)
        fus_gw[l] = kernels.conv3x3_weight_grad(_pad(layer_in), dz)
        fus_gb[l] = dz.sum(axis=(0, 2, 3))
        g = _conv_input_grad(dz, params.fusion_w[l])

    # standardization backward (per sample and plane)
    xhat = cache["xhat"]
    istd = cache["istd"]
    gmean = g.mean(axis=(2, 3), keepdims=True)
    gx = (g * xhat).mean(axis=(2, 3), keepdims=True)
    gcat = istd * (g - gmean - xhat * gx)

    path_gw = [[None] * PATHWAY_DEPTH for _ in range(3)]
    path_gb = [[None] * PATHWAY_DEPTH for _ in range(3)]
    path_ga = [[None] * PATHWAY_DEPTH for _ in range(3)]
    for p in range(3):
        g = gcat[:, p * PATHWAY_WIDTH:(p + 1) * PATHWAY_WIDTH]
        for l in range(PATHWAY_DEPTH - 1, -1, -1):
            z = cache["pre"][p][l]
            a = params.pathway_a[p][l]
            dz = g * np.where(z > 0, 1.0, a[None, :, None, None])
            path_ga[p][l] = np.where(z > 0, 0.0, g * z).sum(axis=(0, 2, 3))
            if l == 0:
                layer_in = cache["blocks"][p]
            else:
                layer_in = _prelu(cache["pre"][p][l - 1], params.pathway_a[p][l - 1])
            path_gw[p][l] = kernels.conv3x3_weight_grad(_pad(layer_in), dz)
            path_gb[p][l] = dz.sum(axis=(0, 2, 3))
            if l > 0:  # the feature blocks themselves need no gradient
                g = _conv_input_grad(dz, params.pathway_w[p][l])

    grads = []
    for p in range(3):
        for l in range(PATHWAY_DEPTH):
            grads.extend([path_gw[p][l], path_gb[p][l], path_ga[p][l]])
    for l in range(n_fusion):
        grads.extend([fus_gw[l], fus_gb[l]])
    return grads
