"""Command-line entry point.

Subcommands: estimate (print an illuminant), map (export a grayness PNG),
bench (benchmark a method over a manifest), train (fit GPNet), synth
(generate a synthetic dataset). Exit codes: 0 success, 1 usage error,
2 data error, 3 numerical/training failure.
"""

import argparse
import os
import sys

import cv2
import numpy as np

from . import evalbench, synthlab
from .errors import ConfigError, DecodeError, GrayAnchorError, UsageError
from .evalbench import ALL_METHODS, MethodConfig, kfold, run_benchmark
from .gpnet import TrainConfig, load_params, save_params, train
from .grayclassic import EXCLUDED
from .imgio import load_image, load_manifest, valid_mask


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    parser = _Parser(prog="grayanchor", description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="global RNG seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for bench (default: $GRAYANCHOR_THREADS or 1)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress notes")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="print the estimated illuminant of one image")
    est.add_argument("--method", required=True, choices=sorted(ALL_METHODS))
    est.add_argument("--image", required=True)
    est.add_argument("--mask-manifest", help="manifest providing exclusion polygons")
    est.add_argument("--k", type=int, help="number of gray pixels to select")
    est.add_argument("--frac", type=float, help="fraction of valid pixels to select")
    est.add_argument("--checkpoint", help="gpnet parameter file")
    est.add_argument("--black-level", type=float, default=0.0)

    mp = sub.add_parser("map", help="write a 16-bit grayness map PNG")
    mp.add_argument("--method", required=True,
                    choices=sorted(evalbench.DETECTOR_METHODS + evalbench.LEARNED_METHODS))
    mp.add_argument("--image", required=True)
    mp.add_argument("--out", required=True)
    mp.add_argument("--mask-manifest")
    mp.add_argument("--checkpoint")
    mp.add_argument("--black-level", type=float, default=0.0)

    ben = sub.add_parser("bench", help="benchmark a method over a manifest")
    ben.add_argument("--manifest", required=True)
    ben.add_argument("--method", required=True, choices=sorted(ALL_METHODS))
    ben.add_argument("--out", required=True, help="report CSV path")
    ben.add_argument("--folds", type=int, help="cross-validation folds for learned methods")
    ben.add_argument("--k", type=int)
    ben.add_argument("--frac", type=float)
    ben.add_argument("--checkpoint")
    _add_train_flags(ben)

    tr = sub.add_parser("train", help="train gpnet and write a checkpoint")
    tr.add_argument("--manifest", required=True)
    tr.add_argument("--out", required=True, help="checkpoint path")
    _add_train_flags(tr)

    syn = sub.add_parser("synth", help="write a synthetic dataset")
    syn.add_argument("--n", type=int, required=True)
    syn.add_argument("--out", required=True, help="output directory")
    syn.add_argument("--size", type=int, default=64)
    syn.add_argument("--grid", type=int, default=4)
    return parser


def _add_train_flags(p):
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--resize", type=int, default=256)
    p.add_argument("--lr0", type=float, default=1e-4)
    p.add_argument("--lr-peak", type=float, default=None)
    p.add_argument("--feature-mode", choices=("constrained", "raw"), default="constrained")


def _train_cfg(args):
    return TrainConfig(lr0=args.lr0, lr_peak=args.lr_peak, epochs=args.epochs,
                       batch_size=args.batch, resize=args.resize, seed=args.seed,
                       feature_mode=args.feature_mode)


def _select_kwargs(args):
    if args.k is not None and args.frac is not None:
        raise UsageError("give --k or --frac, not both")
    out = {}
    if args.k is not None:
        out["k"] = args.k
    if args.frac is not None:
        out["frac"] = args.frac
    return out


def _mask_for(args, img):
    polygons = ()
    if args.mask_manifest:
        wanted = os.path.basename(args.image)
        for entry in load_manifest(args.mask_manifest).entries:
            if entry.image_path == os.path.abspath(args.image) \
                    or os.path.basename(entry.image_path) == wanted:
                polygons = entry.exclusion_polygons
                break
    return valid_mask(img, polygons)


def _cmd_estimate(args):
    img = load_image(args.image, args.black_level)
    mask = _mask_for(args, img)
    method = MethodConfig(args.method, checkpoint=args.checkpoint, **_select_kwargs(args))
    params = None
    if args.method == "gpnet":
        if not args.checkpoint:
            raise UsageError("estimate --method gpnet needs --checkpoint")
        params = load_params(args.checkpoint)
    est = evalbench.estimate_with(method, img, mask, params)
    print(f"{est.e[0]:.6f} {est.e[1]:.6f} {est.e[2]:.6f}")
    return 0


def _cmd_map(args):
    img = load_image(args.image, args.black_level)
    mask = _mask_for(args, img)
    method = MethodConfig(args.method, checkpoint=args.checkpoint)
    params = None
    if args.method == "gpnet":
        if not args.checkpoint:
            raise UsageError("map --method gpnet needs --checkpoint")
        params = load_params(args.checkpoint)
    gray = evalbench.grayness_map_for(method, img, mask, params)
    finite = gray[np.isfinite(gray)]
    scale = float(np.percentile(finite, 99)) if finite.size else 1.0
    if scale <= 0:
        scale = 1.0
    coded = np.where(np.isfinite(gray), np.clip(gray / scale, 0.0, 1.0), 1.0)
    samples = np.rint(coded * 65535.0).astype(np.uint16)
    if not cv2.imwrite(args.out, samples):
        raise DecodeError(f"cannot write {args.out}")
    print(f"scale {scale:.9g}")
    return 0


def _cmd_bench(args, threads):
    data = load_manifest(args.manifest)
    method = MethodConfig(args.method, checkpoint=args.checkpoint,
                          train_cfg=_train_cfg(args), **_select_kwargs(args))
    folds = kfold(data, args.folds, seed=args.seed) if args.folds else None
    run_benchmark(data, method, folds=folds, out_path=args.out, threads=threads)
    if not args.quiet:
        print(f"wrote {args.out}")
    return 0


def _cmd_train(args):
    data = load_manifest(args.manifest)
    params = train(data, _train_cfg(args))
    save_params(args.out, params)
    if not args.quiet:
        print(f"wrote {args.out}")
    return 0


def _cmd_synth(args):
    synthlab.make_dataset(args.n, args.out, seed=args.seed,
                          size=(args.size, args.size), grid=(args.grid, args.grid))
    if not args.quiet:
        print(f"wrote {args.n} scenes to {args.out}")
    return 0


def run_cli(argv):
    """Run the CLI on an argv list; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        threads = args.threads
        if threads is None:
            threads = int(os.environ.get("GRAYANCHOR_THREADS", "1"))
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "map":
            return _cmd_map(args)
        if args.command == "bench":
            return _cmd_bench(args, threads)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "synth":
            return _cmd_synth(args)
        raise UsageError(f"unhandled command {args.command!r}")
    except GrayAnchorError as exc:
        print(f"grayanchor: {exc}", file=sys.stderr)
        return exc.exit_code


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
