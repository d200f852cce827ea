"""Patch extraction, the SGD training loop and its step-decay schedule."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .network import NetworkConfig, NetworkParams, TrainingSample, backward, build_network, forward, loss_mse_per_pixel
from .tensor_ops import NumericError, Velocity, sgd_step

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 100
    base_lr: float = 0.01
    decline: float = 0.1
    decline_every: int = 20
    momentum: float = 0.9
    batch_size: int = 8
    patch_size: int = 40
    patch_stride: int = 40
    seed: int = 0
    float32: bool = False
    checkpoint_every: int = 10

    def __post_init__(self):
        if self.base_lr <= 0:
            raise ValueError("base_lr must be > 0")
        if not 0 < self.decline <= 1:
            raise ValueError("decline must be in (0, 1]")
        if self.epochs < 1 or self.patch_stride < 1 or self.batch_size < 1:
            raise ValueError("epochs, patch_stride and batch_size must be >= 1")


@dataclass
class LossTrace:
    """Per-epoch record of (epoch, lr, mean training loss)."""

    epochs: list[int] = field(default_factory=list)
    lrs: list[float] = field(default_factory=list)
    mean_losses: list[float] = field(default_factory=list)

    def append(self, epoch: int, lr: float, mean_loss: float) -> None:
        self.epochs.append(epoch)
        self.lrs.append(lr)
        self.mean_losses.append(mean_loss)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "lr", "mean_loss"])
            for row in zip(self.epochs, self.lrs, self.mean_losses):
                w.writerow(row)


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """base_lr * decline^(epoch // decline_every)."""
    if not 0 <= epoch < cfg.epochs:
        raise ValueError(f"epoch {epoch} out of range [0, {cfg.epochs})")
    return cfg.base_lr * cfg.decline ** (epoch // cfg.decline_every)


def extract_patches(scene: TrainingSample, size: int, stride: int) -> list[TrainingSample]:
    """Axis-aligned grid crops; patches with no valid pixel are dropped."""
    H, W = scene.x.shape[2:]
    if size > H or size > W:
        raise ValueError(f"patch size {size} exceeds scene dims {H}x{W}")
    patches = []
    dropped = 0
    for r in range(0, H - size + 1, stride):
        for c in range(0, W - size + 1, stride):
            m = scene.mask[r : r + size, c : c + size]
            if not m.any():
                dropped += 1
                continue
            patches.append(
                TrainingSample(
                    scene.x[:, :, r : r + size, c : c + size],
                    scene.y1[:, :, r : r + size, c : c + size],
                    scene.y2[:, :, r : r + size, c : c + size],
                    m,
                )
            )
    if dropped:
        log.info("extract_patches: dropped %d all-missing patches", dropped)
    return patches


def _stack(samples: list[TrainingSample]):
    """Batch N=1 samples into contiguous tensors; masks stay per-sample."""
    x = np.concatenate([s.x for s in samples], axis=0)
    y1 = np.concatenate([s.y1 for s in samples], axis=0)
    y2 = np.concatenate([s.y2 for s in samples], axis=0)
    masks = np.stack([s.mask for s in samples], axis=0)
    return x, y1, y2, masks


def _forward_backward_batch(params, x, y1, y2, masks):
    """One batched forward/backward.

    The optimization objective is the per-pixel-normalized MSE (gradients
    rescaled by 1/(C*H*W)); otherwise the usable learning-rate range would
    shrink with patch size. The logged loss is the per-pixel variant too,
    so traces are comparable across patch geometries.
    """
    pred, cache = forward(params, y1, y2, masks, return_cache=True)
    loss = loss_mse_per_pixel(pred, y1, x)
    grads = backward(params, x, pred, cache)
    scale = 1.0 / (x.shape[1] * x.shape[2] * x.shape[3])
    for g in grads.values():
        g.d_weights *= scale
        g.d_biases *= scale
    return loss, grads


def train(
    dataset: list[TrainingSample],
    cfg: TrainConfig,
    net_config: NetworkConfig,
    params: NetworkParams | None = None,
    checkpoint_dir=None,
) -> tuple[NetworkParams, LossTrace]:
    """SGD with momentum over shuffled mini-batches of equal-size patches."""
    if not dataset:
        raise ValueError("train: empty dataset")
    dtype = np.float32 if cfg.float32 else np.float64
    if params is None:
        params = build_network(net_config, cfg.seed, dtype=dtype)
    else:
        params = params.astype(dtype)
    dataset = [
        TrainingSample(
            s.x.astype(dtype), s.y1.astype(dtype), s.y2.astype(dtype), s.mask
        )
        for s in dataset
    ]
    velocity = Velocity.zeros_like(params.layers)
    rng = np.random.default_rng(cfg.seed)
    trace = LossTrace()
    ckpt_dir = Path(checkpoint_dir) if checkpoint_dir else None

    for epoch in range(cfg.epochs):
        lr = lr_at(epoch, cfg)
        order = rng.permutation(len(dataset))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = [dataset[i] for i in order[start : start + cfg.batch_size]]
            x, y1, y2, masks = _stack(batch)
            loss, grads = _forward_backward_batch(params, x, y1, y2, masks)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at epoch {epoch}; last checkpoint retained"
                )
            sgd_step(params.layers, grads, lr, cfg.momentum, velocity)
            losses.append(loss)
        mean_loss = float(np.mean(losses))
        trace.append(epoch, lr, mean_loss)
        log.info("epoch %d lr %.2g mean loss %.6g", epoch, lr, mean_loss)
        if ckpt_dir and (epoch + 1) % cfg.checkpoint_every == 0:
            from .fileio import save_checkpoint

            save_checkpoint(params, ckpt_dir / f"epoch_{epoch + 1:04d}")
    if ckpt_dir:
        from .fileio import save_checkpoint

        save_checkpoint(params, ckpt_dir / "final")
    return params, trace
