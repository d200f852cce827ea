"""Experiment harness: config schema, dataset assembly, ablation and
registration-error sweeps.

Experiment configs are JSON documents validated against EXPERIMENT_SCHEMA
(unknown keys rejected). The ablation runner trains the full model and
three reduced variants on identical data; the registration sweep evaluates
a trained model with the auxiliary image shifted 0..5 px.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import jsonschema
import numpy as np

from . import masks as mk
from .baselines import copy_fill, lf_reconstruct
from .metrics import evaluate
from .network import NetworkConfig, TrainingSample, reconstruct
from .scenes import synth_scene
from .training import TrainConfig, extract_patches, train

MASK_KINDS = ("modis_stripes", "slc_off", "cloud", "cloud_plus_slc")

EXPERIMENT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["seed", "dataset", "mask", "net", "train"],
    "properties": {
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "required": ["bands", "height", "width"],
            "properties": {
                "bands": {"type": "integer", "minimum": 2},
                "height": {"type": "integer", "minimum": 16},
                "width": {"type": "integer", "minimum": 16},
                "relation": {"enum": ["affine", "nonlinear"]},
                "train_scenes": {"type": "integer", "minimum": 1},
                "texture_sigma": {"type": "number"},
                "quad_strength": {"type": "number"},
                "perturb_strength": {"type": "number"},
                "perturb_sigma": {"type": "number"},
                "mixing_strength": {"type": "number"},
            },
        },
        "mask": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(MASK_KINDS)},
                "period": {"type": "integer"},
                "stripe_width": {"type": "integer"},
                "phase": {"type": "integer"},
                "center_band": {"type": "integer"},
                "max_gap": {"type": "integer"},
                "angle_deg": {"type": "number"},
                "target_coverage": {"type": "number"},
                "smoothness": {"type": "number"},
            },
        },
        "net": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "input_bands": {"type": "integer"},
                "fusion_channels": {"type": "integer"},
                "multiscale_channels": {"type": "integer"},
                "trunk_channels": {"type": "integer"},
                "dilated_layers": {"type": "array", "items": {"type": "integer"}},
                "multiscale": {"type": "boolean"},
                "boost": {"type": "boolean"},
            },
        },
        "train": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epochs": {"type": "integer"},
                "base_lr": {"type": "number"},
                "decline": {"type": "number"},
                "decline_every": {"type": "integer"},
                "momentum": {"type": "number"},
                "batch_size": {"type": "integer"},
                "patch_size": {"type": "integer"},
                "patch_stride": {"type": "integer"},
                "float32": {"type": "boolean"},
                "checkpoint_every": {"type": "integer"},
            },
        },
        "metrics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "data_range": {"type": "number"},
                "scope": {"enum": ["full", "gap_only"]},
            },
        },
    },
}


def validate_config(config: dict) -> dict:
    jsonschema.validate(config, EXPERIMENT_SCHEMA)
    return config


def load_config(path) -> dict:
    with open(path) as f:
        return validate_config(json.load(f))


def make_mask(spec: dict, H: int, W: int, seed: int = 0) -> np.ndarray:
    kind = spec["kind"]
    if kind == "modis_stripes":
        return mk.gen_stripe_mask(
            H, W, spec.get("period", 4), spec.get("stripe_width", 1), spec.get("phase", 0)
        )
    if kind == "slc_off":
        return mk.gen_slcoff_mask(
            H,
            W,
            spec.get("center_band", 0),
            spec.get("max_gap", 10),
            spec.get("period", 33),
            spec.get("angle_deg", 8.0),
            spec.get("phase", 0),
        )
    if kind == "cloud":
        return mk.gen_cloud_mask(
            H, W, spec.get("target_coverage", 0.15), spec.get("smoothness", 5.0), seed
        )
    if kind == "cloud_plus_slc":
        slc = mk.gen_slcoff_mask(
            H,
            W,
            spec.get("center_band", 0),
            spec.get("max_gap", 10),
            spec.get("period", 33),
            spec.get("angle_deg", 8.0),
            spec.get("phase", 0),
        )
        cloud = mk.gen_cloud_mask(
            H, W, spec.get("target_coverage", 0.15), spec.get("smoothness", 5.0), seed
        )
        return mk.combine_masks(slc, cloud)
    raise ValueError(f"unknown mask kind {kind!r}")


def make_sample(scene, mask: np.ndarray) -> TrainingSample:
    y1 = mk.apply_mask(scene.x, mask, 0.0)
    return TrainingSample(scene.x, y1, scene.y2, mask)


def build_dataset(config: dict, seed: int):
    """Seeded (train patches, held-out validation scene) per the config."""
    ds = config["dataset"]
    B, H, W = ds["bands"], ds["height"], ds["width"]
    relation = ds.get("relation", "nonlinear")
    n_train = ds.get("train_scenes", 2)
    gen_kw = {
        k: ds[k]
        for k in ("texture_sigma", "quad_strength", "perturb_strength",
                  "perturb_sigma", "mixing_strength")
        if k in ds
    }
    patches = []
    tcfg = config.get("train", {})
    size = tcfg.get("patch_size", 40)
    stride = tcfg.get("patch_stride", 40)
    for k in range(n_train):
        scene = synth_scene(B, H, W, seed=1000 * seed + k, relation=relation, **gen_kw)
        mask = make_mask(config["mask"], H, W, seed=1000 * seed + k)
        patches.extend(extract_patches(make_sample(scene, mask), size, stride))
    val_scene = synth_scene(B, H, W, seed=1000 * seed + 999, relation=relation, **gen_kw)
    val_mask = make_mask(config["mask"], H, W, seed=1000 * seed + 999)
    return patches, make_sample(val_scene, val_mask)


def net_config_from(config: dict, **overrides) -> NetworkConfig:
    kw = dict(config.get("net", {}))
    kw.setdefault("input_bands", config["dataset"]["bands"])
    kw.update(overrides)
    return NetworkConfig(**kw)


def train_config_from(config: dict, seed: int | None = None) -> TrainConfig:
    kw = dict(config.get("train", {}))
    if seed is not None:
        kw["seed"] = seed
    return TrainConfig(**kw)


def train_and_validate(config: dict, seed: int, net_cfg: NetworkConfig, checkpoint_dir=None):
    """Train on the config's dataset; return (params, trace, gap-only mPSNR)."""
    patches, val = build_dataset(config, seed)
    cfg = train_config_from(config, seed)
    params, trace = train(patches, cfg, net_cfg, checkpoint_dir=checkpoint_dir)
    L = config.get("metrics", {}).get("data_range", 1.0)
    p64 = params.astype(np.float64)
    x_hat = reconstruct(p64, val.y1, val.y2, val.mask)
    rep = evaluate(val.x, x_hat, L, val.mask, scope="gap_only", method="stsnet", seed=seed)
    return params, trace, rep.mpsnr


ABLATION_VARIANTS = ("full", "no_multiscale", "no_dilation", "no_boost")


def variant_net_config(config: dict, variant: str) -> NetworkConfig:
    if variant == "full":
        return net_config_from(config)
    if variant == "no_multiscale":
        return net_config_from(config, multiscale=False)
    if variant == "no_dilation":
        base = net_config_from(config)
        return net_config_from(config, dilated_layers=[1] * len(base.dilated_layers))
    if variant == "no_boost":
        return net_config_from(config, boost=False)
    raise ValueError(f"unknown ablation variant {variant!r}")


def run_ablation(config: dict, out_csv, seeds=(0, 1, 2)) -> list[dict]:
    """Train every variant on identical data per seed; report gap-only mPSNR."""
    from .network import build_network

    validate_config(config)
    rows = []
    for variant in ABLATION_VARIANTS:
        net_cfg = variant_net_config(config, variant)
        n_params = build_network(net_cfg, 0).num_parameters()
        for seed in seeds:
            _, _, mpsnr = train_and_validate(config, seed, net_cfg)
            rows.append(
                {"variant": variant, "seed": seed, "mpsnr": mpsnr, "param_count": n_params}
            )
    with open(out_csv, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["variant", "seed", "mpsnr", "param_count"])
        w.writeheader()
        w.writerows(rows)
    return rows


REGSWEEP_METHODS = ("stsnet", "copy_fill", "lf")


def run_regsweep(config: dict, params, out_csv, shifts=range(6)) -> list[dict]:
    """Evaluate reconstruction quality with y2 shifted 0..5 px to the right.

    One CSV row per (method, shift): gap-only mPSNR/mSSIM/CC/SAM on the
    config's held-out validation scene.
    """
    validate_config(config)
    _, val = build_dataset(config, config["seed"])
    L = config.get("metrics", {}).get("data_range", 1.0)
    p64 = params.astype(np.float64)
    rows = []
    for shift in shifts:
        y2s = mk.shift_image(val.y2, shift, 0)
        recons = {
            "stsnet": reconstruct(p64, val.y1, y2s, val.mask),
            "copy_fill": copy_fill(val.y1, y2s, val.mask),
            "lf": lf_reconstruct(val.y1, y2s, val.mask),
        }
        for method in REGSWEEP_METHODS:
            rep = evaluate(
                val.x, recons[method], L, val.mask, scope="gap_only",
                method=method, shift=shift, seed=config["seed"],
            )
            rows.append(
                {
                    "method": method,
                    "shift": shift,
                    "mpsnr": rep.mpsnr,
                    "mssim": rep.mssim,
                    "cc": rep.cc_all,
                    "sam": rep.sam_mean,
                }
            )
    with open(out_csv, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["method", "shift", "mpsnr", "mssim", "cc", "sam"])
        w.writeheader()
        w.writerows(rows)
    return rows
