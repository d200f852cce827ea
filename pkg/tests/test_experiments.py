import copy
import csv
import json

import numpy as np
import pytest
from jsonschema import ValidationError

from stsfill.experiments import (
    ABLATION_VARIANTS,
    REGSWEEP_METHODS,
    build_dataset,
    load_config,
    make_mask,
    net_config_from,
    run_ablation,
    run_regsweep,
    train_and_validate,
    train_config_from,
    validate_config,
    variant_net_config,
)
from stsfill.masks import coverage

SMALL_CONFIG = {
    "seed": 0,
    "dataset": {"bands": 2, "height": 48, "width": 48, "relation": "affine",
                "train_scenes": 1},
    "mask": {"kind": "modis_stripes", "period": 4, "stripe_width": 1},
    "net": {"fusion_channels": 3, "multiscale_channels": 2, "trunk_channels": 6},
    "train": {"epochs": 2, "batch_size": 2, "patch_size": 16, "patch_stride": 16,
              "float32": True},
}


class TestConfigValidation:
    def test_valid_config_passes(self):
        assert validate_config(copy.deepcopy(SMALL_CONFIG)) is not None

    def test_unknown_key_rejected(self):
        bad = copy.deepcopy(SMALL_CONFIG)
        bad["surprise"] = 1
        with pytest.raises(ValidationError):
            validate_config(bad)

    def test_nested_unknown_key_rejected(self):
        bad = copy.deepcopy(SMALL_CONFIG)
        bad["train"]["optimizer"] = "adam"
        with pytest.raises(ValidationError):
            validate_config(bad)

    def test_missing_required_section(self):
        bad = copy.deepcopy(SMALL_CONFIG)
        del bad["dataset"]
        with pytest.raises(ValidationError):
            validate_config(bad)

    def test_bad_enum(self):
        bad = copy.deepcopy(SMALL_CONFIG)
        bad["mask"]["kind"] = "meteor"
        with pytest.raises(ValidationError):
            validate_config(bad)

    def test_load_config_file(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(SMALL_CONFIG))
        cfg = load_config(p)
        assert cfg["dataset"]["bands"] == 2

    def test_load_malformed_json(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text("{not json")
        with pytest.raises(json.JSONDecodeError):
            load_config(p)


class TestMakeMask:
    def test_every_kind_produces_mask(self):
        specs = [
            {"kind": "modis_stripes"},
            {"kind": "slc_off"},
            {"kind": "cloud", "target_coverage": 0.2},
            {"kind": "cloud_plus_slc", "target_coverage": 0.15},
        ]
        for spec in specs:
            m = make_mask(spec, 64, 64, seed=1)
            assert m.shape == (64, 64)
            assert 0 < coverage(m) < 1

    def test_combined_mask_is_superset_of_parts(self):
        slc = make_mask({"kind": "slc_off"}, 64, 64)
        both = make_mask({"kind": "cloud_plus_slc", "target_coverage": 0.15}, 64, 64, seed=1)
        assert coverage(both) >= coverage(slc)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_mask({"kind": "nope"}, 32, 32)


class TestDatasetAssembly:
    def test_build_dataset_shapes(self):
        patches, val = build_dataset(copy.deepcopy(SMALL_CONFIG), seed=0)
        assert len(patches) == 9  # 48/16 grid
        assert patches[0].x.shape == (1, 2, 16, 16)
        assert val.x.shape == (1, 2, 48, 48)
        # validation scene is held out: different seed stream than training
        assert not np.array_equal(val.x[:, :, :16, :16], patches[0].x)

    def test_dataset_deterministic(self):
        a_patches, a_val = build_dataset(copy.deepcopy(SMALL_CONFIG), seed=3)
        b_patches, b_val = build_dataset(copy.deepcopy(SMALL_CONFIG), seed=3)
        np.testing.assert_array_equal(a_val.x, b_val.x)
        np.testing.assert_array_equal(a_patches[0].y2, b_patches[0].y2)

    def test_net_config_from_defaults_bands(self):
        cfg = net_config_from(copy.deepcopy(SMALL_CONFIG))
        assert cfg.input_bands == 2
        assert cfg.trunk_channels == 6

    def test_train_config_from_seed_override(self):
        cfg = train_config_from(copy.deepcopy(SMALL_CONFIG), seed=7)
        assert cfg.seed == 7
        assert cfg.epochs == 2


class TestVariants:
    def test_variant_configs(self):
        cfg = copy.deepcopy(SMALL_CONFIG)
        full = variant_net_config(cfg, "full")
        assert full.multiscale and full.boost
        assert not variant_net_config(cfg, "no_multiscale").multiscale
        assert not variant_net_config(cfg, "no_boost").boost
        nd = variant_net_config(cfg, "no_dilation")
        assert all(d == 1 for d in nd.dilated_layers)
        assert len(nd.dilated_layers) == len(full.dilated_layers)
        with pytest.raises(ValueError):
            variant_net_config(cfg, "bigger")


class TestRunners:
    def test_train_and_validate_returns_finite_psnr(self):
        cfg = copy.deepcopy(SMALL_CONFIG)
        params, trace, mpsnr = train_and_validate(cfg, 0, net_config_from(cfg))
        assert np.isfinite(mpsnr)
        assert len(trace.mean_losses) == 2

    def test_run_ablation_csv(self, tmp_path):
        cfg = copy.deepcopy(SMALL_CONFIG)
        cfg["train"]["epochs"] = 1
        out = tmp_path / "ablation.csv"
        rows = run_ablation(cfg, out, seeds=(0,))
        assert [r["variant"] for r in rows] == list(ABLATION_VARIANTS)
        with open(out, newline="") as f:
            disk = list(csv.DictReader(f))
        assert len(disk) == 4
        # reduced variants have fewer parameters than the full model
        counts = {r["variant"]: int(r["param_count"]) for r in disk}
        assert counts["no_multiscale"] < counts["full"]
        assert counts["no_boost"] < counts["full"]

    def test_run_regsweep_csv(self, tmp_path):
        cfg = copy.deepcopy(SMALL_CONFIG)
        params, _, _ = train_and_validate(cfg, 0, net_config_from(cfg))
        out = tmp_path / "sweep.csv"
        rows = run_regsweep(cfg, params, out, shifts=range(3))
        assert len(rows) == 3 * len(REGSWEEP_METHODS)
        assert {r["method"] for r in rows} == set(REGSWEEP_METHODS)
        assert sorted({r["shift"] for r in rows}) == [0, 1, 2]
        for r in rows:
            assert np.isfinite(r["mpsnr"])
