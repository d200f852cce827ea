"""Shared test helpers: independent reference implementations (oracles).

The oracles here are deliberately naive (explicit loops, direct formulas)
and never share code with the library paths they check.
"""

import numpy as np
import pytest


def conv2d_direct(x, weights, biases, dilation, pad):
    """Six-nested-loop dilated cross-correlation with zero 'same' padding."""
    N, Cin, H, W = x.shape
    J, _, S, _ = weights.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    Ho = H + 2 * pad - (dilation * (S - 1) + 1) + 1
    Wo = W + 2 * pad - (dilation * (S - 1) + 1) + 1
    out = np.zeros((N, J, Ho, Wo))
    for n in range(N):
        for j in range(J):
            for y in range(Ho):
                for w in range(Wo):
                    acc = biases[j]
                    for i in range(Cin):
                        for u in range(S):
                            for v in range(S):
                                acc += (
                                    weights[j, i, u, v]
                                    * xp[n, i, y + dilation * u, w + dilation * v]
                                )
                    out[n, j, y, w] = acc
    return out


def psnr_direct(x, y, L):
    mse = np.mean((np.asarray(x, float) - np.asarray(y, float)) ** 2)
    if mse == 0:
        return np.inf
    return 10 * np.log10(L * L / mse)


def ssim_direct(x, y, L, size=11, sigma=1.5, K1=0.01, K2=0.03):
    """Per-window loop over all fully interior positions."""
    r = np.arange(size) - (size - 1) / 2
    g = np.exp(-(r**2) / (2 * sigma**2))
    w = np.outer(g, g)
    w /= w.sum()
    C1, C2 = (K1 * L) ** 2, (K2 * L) ** 2
    H, W = x.shape
    vals = []
    for i in range(H - size + 1):
        for j in range(W - size + 1):
            xs = x[i : i + size, j : j + size]
            ys = y[i : i + size, j : j + size]
            mx = np.sum(w * xs)
            my = np.sum(w * ys)
            vx = np.sum(w * xs * xs) - mx * mx
            vy = np.sum(w * ys * ys) - my * my
            cxy = np.sum(w * xs * ys) - mx * my
            vals.append(
                ((2 * mx * my + C1) * (2 * cxy + C2))
                / ((mx * mx + my * my + C1) * (vx + vy + C2))
            )
    return float(np.mean(vals))


def cc_direct(x, y):
    xv, yv = np.asarray(x, float).ravel(), np.asarray(y, float).ravel()
    return float(
        np.sum((xv - xv.mean()) * (yv - yv.mean()))
        / np.sqrt(np.sum((xv - xv.mean()) ** 2) * np.sum((yv - yv.mean()) ** 2))
    )


def sam_direct(x, y):
    """Per-pixel loop; x, y are (C, H, W)."""
    C, H, W = x.shape
    angles = []
    for i in range(H):
        for j in range(W):
            a, b = x[:, i, j], y[:, i, j]
            na, nb = np.linalg.norm(a), np.linalg.norm(b)
            if na == 0 or nb == 0:
                continue
            angles.append(np.degrees(np.arccos(np.clip(a @ b / (na * nb), -1, 1))))
    return float(np.mean(angles))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
