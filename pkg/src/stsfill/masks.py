"""Degradation simulators: detector stripes, SLC-off wedge gaps, cloud blobs.

Masks are (H, W) uint8 arrays, 1 = valid pixel, 0 = missing. All
generators are deterministic (seeded where random).
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .tensor_ops import ShapeError, check_tensor4


def coverage(mask: np.ndarray) -> float:
    """Fraction of missing (zero) pixels."""
    return float(1.0 - mask.mean())


def _check_mask(mask: np.ndarray) -> np.ndarray:
    if mask.ndim != 2:
        raise ShapeError(f"mask must be 2-D, got {mask.ndim} dims")
    return mask


def gen_stripe_mask(H: int, W: int, period: int = 4, stripe_width: int = 1, phase: int = 0) -> np.ndarray:
    """Horizontal dead-line stripes: rows r with (r-phase) mod period < width."""
    if stripe_width < 1:
        raise ValueError(f"stripe_width must be >= 1, got {stripe_width}")
    if not stripe_width < period <= H:
        raise ValueError(
            f"need stripe_width < period <= H, got width={stripe_width} "
            f"period={period} H={H}"
        )
    rows = (np.arange(H) - phase) % period < stripe_width
    mask = np.ones((H, W), dtype=np.uint8)
    mask[rows, :] = 0
    return mask


def gen_slcoff_mask(
    H: int,
    W: int,
    center_band: int = 0,
    max_gap: int = 10,
    period: int = 33,
    angle_deg: float = 8.0,
    phase: int = 0,
) -> np.ndarray:
    """Scan-line-corrector wedge gaps.

    Slanted stripes repeat every `period` rows; the missing width is 0 at
    the vertical centerline and grows linearly to `max_gap` at the left and
    right edges. `center_band` widens the fully-valid central column band.
    """
    if max_gap < 1:
        raise ValueError(f"max_gap must be >= 1, got {max_gap}")
    if center_band < 0:
        raise ValueError(f"center_band must be >= 0, got {center_band}")
    if period <= max_gap:
        raise ValueError(f"degenerate geometry: period {period} <= max_gap {max_gap}")
    cx = (W - 1) / 2.0
    cols = np.arange(W)
    dist = np.maximum(np.abs(cols - cx) - center_band, 0.0)
    half_extent = max(cx - center_band, 1.0)
    width = max_gap * dist / half_extent  # gap width per column, 0..max_gap
    slope = np.tan(np.deg2rad(angle_deg))
    rows = np.arange(H)[:, None]
    stripe_pos = (rows + slope * cols[None, :] - phase) % period
    mask = (stripe_pos >= width[None, :]).astype(np.uint8)
    return mask


def gen_cloud_mask(
    H: int, W: int, target_coverage: float, smoothness: float = 5.0, seed: int = 0
) -> np.ndarray:
    """Smooth blobby cloud mask with missing fraction ~ target_coverage.

    Seeded white noise is blurred by three box filters of the given radius
    and thresholded at the quantile matching the target; the threshold is
    nudged if ties push the achieved coverage off by more than 0.01.
    """
    if not 0 < target_coverage < 0.5:
        raise ValueError(f"target_coverage must be in (0, 0.5), got {target_coverage}")
    rng = np.random.default_rng(seed)
    field = rng.standard_normal((H, W))
    size = 2 * int(round(smoothness)) + 1
    for _ in range(3):
        field = ndimage.uniform_filter(field, size=size, mode="reflect")
    thr = np.quantile(field, 1.0 - target_coverage)
    for _ in range(20):
        mask = (field <= thr).astype(np.uint8)
        if abs(coverage(mask) - target_coverage) <= 0.01:
            return mask
        thr += (target_coverage - coverage(mask)) * field.std()
    raise RuntimeError(
        f"cloud mask: could not reach coverage {target_coverage} within 20 iterations"
    )


def combine_masks(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid only where valid in both."""
    _check_mask(a)
    _check_mask(b)
    if a.shape != b.shape:
        raise ShapeError(f"combine_masks: {a.shape} vs {b.shape}")
    return (a.astype(bool) & b.astype(bool)).astype(np.uint8)


def apply_mask(x: np.ndarray, mask: np.ndarray, fill: float = 0.0) -> np.ndarray:
    """Corrupt a scene: valid pixels kept, missing pixels set to `fill`."""
    check_tensor4(x, "x")
    _check_mask(mask)
    if mask.shape != x.shape[2:]:
        raise ShapeError(f"apply_mask: mask {mask.shape} vs spatial {x.shape[2:]}")
    return np.where((mask != 0)[None, None], x, x.dtype.type(fill))


def shift_image(x: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Integer translation by (dx right, dy down) with edge replication."""
    check_tensor4(x, "x")
    if abs(dx) > 5 or abs(dy) > 5:
        raise ValueError(f"shift out of the supported +-5 px range: ({dx}, {dy})")
    if dx == 0 and dy == 0:
        return x.copy()
    H, W = x.shape[2:]
    rows = np.clip(np.arange(H) - dy, 0, H - 1)
    cols = np.clip(np.arange(W) - dx, 0, W - 1)
    return x[:, :, rows[:, None], cols[None, :]]
