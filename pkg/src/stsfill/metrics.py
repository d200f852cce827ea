"""Reconstruction quality metrics: PSNR, SSIM, CC, SAM.

Single-band rasters are (H, W); multi-band images are (C, H, W). A scope
mask restricts PSNR/CC/SAM to the gap region (mask == 0); SSIM is always
computed over the full raster since its windows are not maskable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .tensor_ops import ShapeError

CSV_COLUMNS = ["method", "scope", "band", "psnr", "ssim", "cc", "sam", "shift", "seed"]


def _scope_values(x: np.ndarray, y: np.ndarray, scope_mask: np.ndarray | None):
    if x.shape != y.shape:
        raise ShapeError(f"metric inputs disagree: {x.shape} vs {y.shape}")
    if scope_mask is None:
        return x.ravel(), y.ravel()
    if scope_mask.shape != x.shape[-2:]:
        raise ShapeError(f"scope mask {scope_mask.shape} vs raster {x.shape}")
    sel = scope_mask == 0
    if not sel.any():
        raise ValueError("empty scope region (mask has no missing pixels)")
    return x[..., sel].ravel(), y[..., sel].ravel()


def psnr(x: np.ndarray, y: np.ndarray, L: float, scope_mask: np.ndarray | None = None) -> float:
    """10*log10(L^2 / MSE); +inf when the rasters agree exactly."""
    if L <= 0:
        raise ValueError(f"peak value L must be > 0, got {L}")
    xv, yv = _scope_values(x, y, scope_mask)
    mse = float(np.mean((xv - yv) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(L * L / mse)


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 2-D Gaussian weights."""
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(
    x: np.ndarray,
    y: np.ndarray,
    L: float,
    window_size: int = 11,
    sigma: float = 1.5,
    K1: float = 0.01,
    K2: float = 0.03,
) -> float:
    """Mean local SSIM over all fully-interior windows (valid positions)."""
    if x.shape != y.shape:
        raise ShapeError(f"ssim inputs disagree: {x.shape} vs {y.shape}")
    if x.ndim != 2:
        raise ShapeError(f"ssim expects a single band (H, W), got {x.shape}")
    H, W = x.shape
    if H < window_size or W < window_size:
        raise ValueError(f"image {H}x{W} smaller than the {window_size}x{window_size} window")
    w = gaussian_window(window_size, sigma)
    C1, C2 = (K1 * L) ** 2, (K2 * L) ** 2

    xw = np.lib.stride_tricks.sliding_window_view(x, (window_size, window_size))
    yw = np.lib.stride_tricks.sliding_window_view(y, (window_size, window_size))
    mu_x = np.tensordot(xw, w, axes=([2, 3], [0, 1]))
    mu_y = np.tensordot(yw, w, axes=([2, 3], [0, 1]))
    xx = np.tensordot(xw * xw, w, axes=([2, 3], [0, 1]))
    yy = np.tensordot(yw * yw, w, axes=([2, 3], [0, 1]))
    xy = np.tensordot(xw * yw, w, axes=([2, 3], [0, 1]))
    var_x = xx - mu_x**2
    var_y = yy - mu_y**2
    cov = xy - mu_x * mu_y
    num = (2 * mu_x * mu_y + C1) * (2 * cov + C2)
    den = (mu_x**2 + mu_y**2 + C1) * (var_x + var_y + C2)
    return float(np.mean(num / den))


def cc(x: np.ndarray, y: np.ndarray, scope_mask: np.ndarray | None = None) -> float:
    """Pearson correlation over scope pixels, pooled across bands."""
    xv, yv = _scope_values(x, y, scope_mask)
    if xv.size < 2:
        raise ValueError("cc needs at least 2 scope pixels")
    xd = xv - xv.mean()
    yd = yv - yv.mean()
    sx = float(np.sqrt(np.sum(xd * xd)))
    sy = float(np.sqrt(np.sum(yd * yd)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("cc undefined: zero variance on the scope region")
    return float(np.sum(xd * yd) / (sx * sy))


def sam(x: np.ndarray, y: np.ndarray, scope_mask: np.ndarray | None = None) -> float:
    """Mean spectral angle in degrees; zero spectral vectors are skipped."""
    if x.ndim != 3 or x.shape[0] < 2:
        raise ShapeError(f"sam expects (C>=2, H, W), got {x.shape}")
    if x.shape != y.shape:
        raise ShapeError(f"sam inputs disagree: {x.shape} vs {y.shape}")
    if scope_mask is not None:
        if scope_mask.shape != x.shape[1:]:
            raise ShapeError(f"scope mask {scope_mask.shape} vs raster {x.shape}")
        sel = scope_mask == 0
        xs, ys = x[:, sel], y[:, sel]  # (C, P)
    else:
        xs, ys = x.reshape(x.shape[0], -1), y.reshape(y.shape[0], -1)
    nx = np.linalg.norm(xs, axis=0)
    ny = np.linalg.norm(ys, axis=0)
    ok = (nx > 0) & (ny > 0)
    if not ok.any():
        raise ValueError("sam undefined: all spectral vectors are zero")
    cosang = np.sum(xs[:, ok] * ys[:, ok], axis=0) / (nx[ok] * ny[ok])
    angles = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    return float(np.mean(angles))


@dataclass
class MetricsReport:
    """Per-band and aggregate metrics for one reconstruction, one scope."""

    scope: str  # "full" or "gap_only"
    data_range: float
    psnr_per_band: list[float] = field(default_factory=list)
    ssim_per_band: list[float] = field(default_factory=list)
    cc_per_band: list[float] = field(default_factory=list)
    mpsnr: float = math.nan
    mssim: float = math.nan
    cc_all: float = math.nan
    sam_mean: float = math.nan
    method: str = ""
    shift: int = 0
    seed: int = 0

    def to_rows(self) -> list[dict]:
        """Flat rows, one per band plus an 'all' aggregate row."""
        rows = []
        for b, (p, s, c) in enumerate(
            zip(self.psnr_per_band, self.ssim_per_band, self.cc_per_band)
        ):
            rows.append(
                {
                    "method": self.method,
                    "scope": self.scope,
                    "band": b,
                    "psnr": p,
                    "ssim": s,
                    "cc": c,
                    "sam": "",
                    "shift": self.shift,
                    "seed": self.seed,
                }
            )
        rows.append(
            {
                "method": self.method,
                "scope": self.scope,
                "band": "all",
                "psnr": self.mpsnr,
                "ssim": self.mssim,
                "cc": self.cc_all,
                "sam": self.sam_mean,
                "shift": self.shift,
                "seed": self.seed,
            }
        )
        return rows

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)


def evaluate(
    x: np.ndarray,
    x_hat: np.ndarray,
    L: float,
    mask: np.ndarray | None = None,
    scope: str = "full",
    method: str = "",
    shift: int = 0,
    seed: int = 0,
) -> MetricsReport:
    """Full metric suite on a (C, H, W) truth/reconstruction pair.

    scope="gap_only" restricts PSNR/CC/SAM to mask == 0 pixels.
    """
    if x.ndim == 4:
        x, x_hat = x[0], x_hat[0]
    if x.ndim != 3:
        raise ShapeError(f"evaluate expects (C, H, W), got {x.shape}")
    scope_mask = mask if scope == "gap_only" else None
    rep = MetricsReport(scope=scope, data_range=L, method=method, shift=shift, seed=seed)
    for b in range(x.shape[0]):
        rep.psnr_per_band.append(psnr(x[b], x_hat[b], L, scope_mask))
        rep.ssim_per_band.append(ssim(x[b], x_hat[b], L))
        rep.cc_per_band.append(cc(x[b], x_hat[b], scope_mask))
    rep.mpsnr = float(np.mean(rep.psnr_per_band))
    rep.mssim = float(np.mean(rep.ssim_per_band))
    rep.cc_all = cc(x, x_hat, scope_mask)
    if x.shape[0] >= 2:
        rep.sam_mean = sam(x, x_hat, scope_mask)
    return rep


def write_reports_csv(path, reports: list[MetricsReport]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for rep in reports:
            for row in rep.to_rows():
                writer.writerow(row)
