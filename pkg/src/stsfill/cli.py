"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numeric
failure. Diagnostics go to stderr; machine-readable output goes to files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import experiments, fileio
from .baselines import copy_fill, lf_reconstruct
from .gradcheck import network_gradcheck
from .masks import apply_mask
from .metrics import evaluate, write_reports_csv
from .network import NetworkConfig, TrainingSample, build_network, reconstruct
from .scenes import synth_scene
from .tensor_ops import ConfigError, NumericError, ShapeError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_mask(path) -> np.ndarray:
    m = fileio.read_tensor(path)
    if m.shape[0] != 1 or m.shape[1] != 1:
        raise fileio.TensorFileError(f"mask tensor must be 1x1xHxW, got {m.shape}")
    return (m[0, 0] != 0).astype(np.uint8)


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene = synth_scene(args.bands, args.height, args.width, args.seed, args.relation)
    fileio.write_tensor(out / "x.stsr", scene.x)
    fileio.write_tensor(out / "y2.stsr", scene.y2)
    with open(out / "meta.json", "w") as f:
        json.dump({"relation": scene.relation, "seed": scene.seed, "coeffs": scene.coeffs}, f)
    print(f"wrote scene to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_mask(args) -> int:
    spec = {"kind": args.kind}
    for key in ("period", "stripe_width", "phase", "center_band", "max_gap",
                "angle_deg", "target_coverage", "smoothness"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    mask = experiments.make_mask(spec, args.height, args.width, args.seed)
    fileio.write_tensor(args.out, mask[None, None].astype(np.float64))
    print(f"mask coverage of zeros: {1 - mask.mean():.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_apply(args) -> int:
    x = fileio.read_tensor(args.scene)
    mask = _read_mask(args.mask)
    fileio.write_tensor(args.out, apply_mask(x, mask, args.fill))
    return EXIT_OK


def cmd_train(args) -> int:
    config = experiments.load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    out = Path(args.out or config.get("output_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    net_cfg = experiments.net_config_from(config)
    patches, _ = experiments.build_dataset(config, config["seed"])
    cfg = experiments.train_config_from(config, config["seed"])
    from .training import train

    params, trace = train(patches, cfg, net_cfg, checkpoint_dir=out)
    trace.write_csv(out / "loss_trace.csv")
    print(f"final mean loss {trace.mean_losses[-1]:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    params = fileio.load_checkpoint(args.checkpoint)
    y1 = fileio.read_tensor(args.y1)
    y2 = fileio.read_tensor(args.y2)
    mask = _read_mask(args.mask)
    x_hat = reconstruct(params.astype(np.float64), y1, y2, mask)
    fileio.write_tensor(args.out, x_hat)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    x = fileio.read_tensor(args.truth)
    x_hat = fileio.read_tensor(args.recon)
    mask = _read_mask(args.mask)
    reports = [
        evaluate(x, x_hat, args.data_range, mask, scope=scope, method=args.method)
        for scope in ("full", "gap_only")
    ]
    write_reports_csv(args.out, reports)
    return EXIT_OK


def cmd_baseline(args) -> int:
    y1 = fileio.read_tensor(args.y1)
    y2 = fileio.read_tensor(args.y2)
    mask = _read_mask(args.mask)
    if args.method == "copy_fill":
        x_hat = copy_fill(y1, y2, mask)
    else:
        x_hat = lf_reconstruct(y1, y2, mask)
    fileio.write_tensor(args.out, x_hat)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .masks import gen_stripe_mask

    net_cfg = NetworkConfig(
        input_bands=1, fusion_channels=3, multiscale_channels=2, trunk_channels=6
    )
    params = build_network(net_cfg, args.seed, zero_output_init=False)
    rng = np.random.default_rng(args.seed)
    x = rng.uniform(0.1, 0.9, size=(1, 1, 8, 8))
    mask = gen_stripe_mask(8, 8, 4, 1)
    y1 = apply_mask(x, mask)
    y2 = rng.uniform(0.1, 0.9, size=x.shape)
    report = network_gradcheck(params, TrainingSample(x, y1, y2, mask))
    worst = max(report.values())
    print(f"max-relative-error {worst:.3e}", file=sys.stderr)
    return EXIT_OK if worst < 1e-5 else EXIT_NUMERIC


def cmd_ablate(args) -> int:
    config = experiments.load_config(args.config)
    experiments.run_ablation(config, args.out, seeds=tuple(args.seeds))
    return EXIT_OK


def cmd_regsweep(args) -> int:
    config = experiments.load_config(args.config)
    params = fileio.load_checkpoint(args.checkpoint)
    experiments.run_regsweep(config, params, args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    x = fileio.read_tensor(args.tensor)
    bands = [int(b) for b in args.bands.split(",")]
    fileio.export_image(x, bands, args.out, (args.range_min, args.range_max))
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="stsfill", description="Gap filling for multi-band rasters")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("synth", cmd_synth, help="generate a synthetic scene pair")
    sp.add_argument("--bands", type=int, default=2)
    sp.add_argument("--height", type=int, default=256)
    sp.add_argument("--width", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--relation", choices=["affine", "nonlinear"], default="nonlinear")
    sp.add_argument("--out", required=True)

    sp = add("mask", cmd_mask, help="generate a degradation mask")
    sp.add_argument("--kind", choices=list(experiments.MASK_KINDS), required=True)
    sp.add_argument("--height", type=int, default=256)
    sp.add_argument("--width", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    for key, typ in (
        ("period", int), ("stripe_width", int), ("phase", int), ("center_band", int),
        ("max_gap", int), ("angle_deg", float), ("target_coverage", float),
        ("smoothness", float),
    ):
        sp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ, default=None)
    sp.add_argument("--out", required=True)

    sp = add("apply", cmd_apply, help="corrupt a scene with a mask")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--mask", required=True)
    sp.add_argument("--fill", type=float, default=0.0)
    sp.add_argument("--out", required=True)

    sp = add("train", cmd_train, help="train from an experiment config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--deterministic", action="store_true",
                    help="single-threaded bitwise-reproducible mode (the default execution model)")
    sp.add_argument("--out", default=None)

    sp = add("reconstruct", cmd_reconstruct, help="run a trained model")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--y1", required=True)
    sp.add_argument("--y2", required=True)
    sp.add_argument("--mask", required=True)
    sp.add_argument("--out", required=True)

    sp = add("evaluate", cmd_evaluate, help="metric suite (full and gap-only rows)")
    sp.add_argument("--truth", required=True)
    sp.add_argument("--recon", required=True)
    sp.add_argument("--mask", required=True)
    sp.add_argument("--data-range", dest="data_range", type=float, default=1.0)
    sp.add_argument("--method", default="stsnet")
    sp.add_argument("--out", required=True)

    sp = add("baseline", cmd_baseline, help="classical reconstruction")
    sp.add_argument("--method", choices=["copy_fill", "lf"], required=True)
    sp.add_argument("--y1", required=True)
    sp.add_argument("--y2", required=True)
    sp.add_argument("--mask", required=True)
    sp.add_argument("--out", required=True)

    sp = add("gradcheck", cmd_gradcheck, help="finite-difference check on a tiny net")
    # default seed chosen to keep pre-activations away from ReLU kinks,
    # where central differences misestimate the true (sub)gradient
    sp.add_argument("--seed", type=int, default=1)

    sp = add("ablate", cmd_ablate, help="train full model and reduced variants")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    sp.add_argument("--out", required=True)

    sp = add("regsweep", cmd_regsweep, help="registration-error sweep 0..5 px")
    sp.add_argument("--config", required=True)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--out", required=True)

    sp = add("export", cmd_export, help="render bands to PGM/PPM")
    sp.add_argument("--tensor", required=True)
    sp.add_argument("--bands", default="0")
    sp.add_argument("--range-min", dest="range_min", type=float, default=0.0)
    sp.add_argument("--range-max", dest="range_max", type=float, default=1.0)
    sp.add_argument("--out", required=True)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (
        fileio.TensorFileError,
        ShapeError,
        ConfigError,
        ValueError,
        OSError,
        json.JSONDecodeError,
        jsonschema.ValidationError,
    ) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
