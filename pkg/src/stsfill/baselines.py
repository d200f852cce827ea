"""Classical reference reconstructions: per-band linear fitting and copy-fill."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_ops import ShapeError, check_tensor4


@dataclass
class LinearFit:
    """x ~ slope * y2 + intercept, fitted on mask-valid pixels."""

    slope: float
    intercept: float
    rms: float


def lf_fit(y2_band: np.ndarray, x_band_observed: np.ndarray, mask: np.ndarray, degree: int = 1):
    """Least-squares polynomial fit of observed x on y2 over valid pixels.

    Returns a LinearFit for degree 1; raw coefficient array (highest power
    first) for other degrees.
    """
    if y2_band.shape != x_band_observed.shape or mask.shape != y2_band.shape:
        raise ShapeError(
            f"lf_fit: shapes {y2_band.shape}, {x_band_observed.shape}, {mask.shape}"
        )
    sel = mask != 0
    yv = y2_band[sel].astype(np.float64)
    xv = x_band_observed[sel].astype(np.float64)
    if yv.size < degree + 1:
        raise ValueError(f"lf_fit: need >= {degree + 1} valid pixels, got {yv.size}")
    if np.ptp(yv) == 0:
        raise ValueError("lf_fit: degenerate regressor (y2 constant on valid pixels)")
    coeffs = np.polyfit(yv, xv, degree)
    resid = xv - np.polyval(coeffs, yv)
    rms = float(np.sqrt(np.mean(resid**2)))
    if degree == 1:
        return LinearFit(float(coeffs[0]), float(coeffs[1]), rms)
    return coeffs


def lf_reconstruct(y1: np.ndarray, y2: np.ndarray, mask: np.ndarray, degree: int = 1) -> np.ndarray:
    """Fill gaps with the per-band polynomial prediction from y2."""
    check_tensor4(y1, "y1")
    check_tensor4(y2, "y2")
    if y1.shape != y2.shape:
        raise ShapeError(f"lf_reconstruct: y1 {y1.shape} vs y2 {y2.shape}")
    valid = mask != 0
    out = y1.copy()
    for n in range(y1.shape[0]):
        for b in range(y1.shape[1]):
            fit = lf_fit(y2[n, b], y1[n, b], mask, degree)
            coeffs = [fit.slope, fit.intercept] if degree == 1 else fit
            pred = np.polyval(coeffs, y2[n, b])
            out[n, b] = np.where(valid, y1[n, b], pred)
    return out


def copy_fill(y1: np.ndarray, y2: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill gaps with y2 verbatim."""
    check_tensor4(y1, "y1")
    if y1.shape != y2.shape:
        raise ShapeError(f"copy_fill: y1 {y1.shape} vs y2 {y2.shape}")
    if mask.shape != y1.shape[2:]:
        raise ShapeError(f"copy_fill: mask {mask.shape} vs spatial {y1.shape[2:]}")
    return np.where((mask != 0)[None, None], y1, y2)
