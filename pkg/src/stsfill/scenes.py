"""Synthetic multi-band scene generation.

Scenes are spatially correlated random fields normalized to [0, 1]. The
auxiliary image is built so that the ground truth is an affine function of
it per band (relation="affine", exact) or an affine function plus a mild
quadratic term and independent texture perturbation ("nonlinear"),
mimicking an imperfectly correlated second band / second date.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass
class SyntheticScene:
    x: np.ndarray  # (1, B, H, W) ground truth in [0, 1]
    y2: np.ndarray  # (1, B, H, W) auxiliary image
    coeffs: list[tuple[float, float]]  # per band: x = a*y2 + b (affine part)
    relation: str
    seed: int


def _textured_field(rng, H, W, sigma):
    f = ndimage.gaussian_filter(rng.standard_normal((H, W)), sigma, mode="reflect")
    f -= f.min()
    peak = f.max()
    return f / peak if peak > 0 else f


def synth_scene(
    bands: int,
    H: int,
    W: int,
    seed: int,
    relation: str = "nonlinear",
    texture_sigma: float = 4.0,
    quad_strength: float = 0.25,
    perturb_strength: float = 0.08,
    perturb_sigma: float | None = None,
    mixing_strength: float = 0.0,
) -> SyntheticScene:
    """Generate a correlated (ground truth, auxiliary) scene pair.

    ``perturb_sigma`` sets the correlation length of the auxiliary image's
    perturbation field independently of the scene texture; it defaults to
    ``texture_sigma``. A large value gives a slowly varying discrepancy
    between the two inputs that can be estimated from context, while the
    scene texture itself stays fine-grained.

    ``mixing_strength`` m in [0, 0.5) blends each auxiliary band with the
    mean of the other bands (nonlinear mode only), mimicking cross-band
    spectral response overlap. The blend is an invertible channel mixture,
    so multi-channel models can undo it while any per-band regression
    cannot.
    """
    if bands < 2:
        raise ValueError(f"synth_scene needs >= 2 bands, got {bands}")
    if relation not in ("affine", "nonlinear"):
        raise ValueError(f"unknown relation {relation!r}")
    if not 0.0 <= mixing_strength < 0.5:
        raise ValueError(f"mixing_strength must be in [0, 0.5), got {mixing_strength}")
    if perturb_sigma is None:
        perturb_sigma = texture_sigma
    rng = np.random.default_rng(seed)
    base = _textured_field(rng, H, W, texture_sigma)
    x = np.empty((1, bands, H, W))
    y2 = np.empty_like(x)
    coeffs = []
    for b in range(bands):
        own = _textured_field(rng, H, W, texture_sigma)
        xb = 0.05 + 0.9 * (0.65 * base + 0.35 * own)
        x[0, b] = xb
        a = float(rng.uniform(0.8, 1.25))
        c = float(rng.uniform(-0.08, 0.08))
        coeffs.append((a, c))
        if relation == "affine":
            # exact: x = a*y2 + c
            y2[0, b] = (xb - c) / a
        else:
            y2b = (xb - c) / a
            y2b = y2b + quad_strength * (xb - 0.5) ** 2
            y2b = y2b + perturb_strength * (
                _textured_field(rng, H, W, perturb_sigma) - 0.5
            )
            y2[0, b] = y2b
    if relation == "nonlinear" and mixing_strength > 0.0 and bands > 1:
        m = mixing_strength
        others = (y2[0].sum(axis=0) - y2[0]) / (bands - 1)
        y2[0] = (1.0 - m) * y2[0] + m * others
    return SyntheticScene(x, y2, coeffs, relation, seed)
