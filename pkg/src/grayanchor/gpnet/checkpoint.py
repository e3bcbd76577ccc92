"""Parameter checkpoint file format.

Layout (all little-endian):
  bytes 0-5   magic "GPNET1"
  11 x int32  pathway input channels (3), pathway width, pathway depth,
              fusion depth, fusion output widths (5)
  1 x float64 output smoothing sigma
  tensors     raw float64 in param_tensors order (row-major)

The reader rejects wrong magic, widths that differ from the fixed
architecture, and truncated or oversized files. Pathway input channels are
free (the raw-image ablation stores (3, 3, 3)).
"""

import numpy as np

from ..errors import CheckpointError
from .net import (FUSION_WIDTHS, PATHWAY_DEPTH, PATHWAY_WIDTH, NetParams,
                  param_tensors)

MAGIC = b"GPNET1"


def save_params(path, params):
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        header = np.array(
            list(params.input_channels)
            + [PATHWAY_WIDTH, PATHWAY_DEPTH, len(FUSION_WIDTHS) - 1]
            + list(FUSION_WIDTHS[1:]),
            dtype="<i4")
        fh.write(header.tobytes())
        fh.write(np.float64(params.sigma_out).astype("<f8").tobytes())
        for _, tensor in param_tensors(params):
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def load_params(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:6] != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a GPNET1 checkpoint")
    header = np.frombuffer(blob, dtype="<i4", count=11, offset=6)
    c_ins = tuple(int(c) for c in header[:3])
    width, depth, fusion_depth = (int(v) for v in header[3:6])
    fusion_out = tuple(int(v) for v in header[6:11])
    if any(c < 1 for c in c_ins):
        raise CheckpointError(f"{path}: bad pathway input channels {c_ins}")
    if (width, depth, fusion_depth) != (PATHWAY_WIDTH, PATHWAY_DEPTH, len(FUSION_WIDTHS) - 1) \
            or fusion_out != FUSION_WIDTHS[1:]:
        raise CheckpointError(
            f"{path}: architecture widths {(width, depth, fusion_depth, fusion_out)} "
            "do not match this build")
    offset = 6 + 11 * 4
    sigma_out = float(np.frombuffer(blob, dtype="<f8", count=1, offset=offset)[0])
    offset += 8

    pw, pb, pa = [], [], []
    fw, fb = [], []

    def take(shape):
        nonlocal offset
        n = int(np.prod(shape))
        if offset + 8 * n > len(blob):
            raise CheckpointError(f"{path}: truncated checkpoint")
        arr = np.frombuffer(blob, dtype="<f8", count=n, offset=offset).reshape(shape).copy()
        offset += 8 * n
        return arr

    for c_in in c_ins:
        chans = [c_in] + [PATHWAY_WIDTH] * PATHWAY_DEPTH
        ws, bs, slopes = [], [], []
        for l in range(PATHWAY_DEPTH):
            ws.append(take((chans[l + 1], chans[l], 3, 3)))
            bs.append(take((chans[l + 1],)))
            slopes.append(take((chans[l + 1],)))
        pw.append(ws)
        pb.append(bs)
        pa.append(slopes)
    for l in range(len(FUSION_WIDTHS) - 1):
        fw.append(take((FUSION_WIDTHS[l + 1], FUSION_WIDTHS[l], 3, 3)))
        fb.append(take((FUSION_WIDTHS[l + 1],)))
    if offset != len(blob):
        raise CheckpointError(f"{path}: {len(blob) - offset} trailing bytes")
    if not all(np.all(np.isfinite(t)) for t in
               [x for ws in pw for x in ws] + [x for bs in pb for x in bs]
               + [x for sl in pa for x in sl] + fw + fb):
        raise CheckpointError(f"{path}: checkpoint contains non-finite values")
    return NetParams(pw, pb, pa, fw, fb, sigma_out=sigma_out)
