"""Finite-difference verification of the network's analytic gradients."""

from __future__ import annotations

import numpy as np

from .network import NetworkParams, TrainingSample, backward, forward, loss_mse


def _loss(params: NetworkParams, s: TrainingSample) -> float:
    pred = forward(params, s.y1, s.y2, s.mask)
    return loss_mse(pred, s.y1, s.x)


def network_gradcheck(
    params: NetworkParams, sample: TrainingSample, step: float = 1e-5
) -> dict[str, float]:
    """Max relative error of analytic vs central-difference gradients per layer.

    Relative error is |a - n| / max(|a|, |n|, 1e-6); 64-bit parameters are
    required for the errors to be meaningful.
    """
    pred, cache = forward(params, sample.y1, sample.y2, sample.mask, return_cache=True)
    grads = backward(params, sample.x, pred, cache)
    report: dict[str, float] = {}
    for name, layer in params.layers.items():
        worst = 0.0
        for arr, g in ((layer.weights, grads[name].d_weights), (layer.biases, grads[name].d_biases)):
            flat = arr.reshape(-1)
            gflat = g.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                lp = _loss(params, sample)
                flat[i] = orig - step
                lm = _loss(params, sample)
                flat[i] = orig
                numeric = (lp - lm) / (2 * step)
                analytic = gflat[i]
                rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)
                worst = max(worst, rel)
        report[name] = worst
    return report
