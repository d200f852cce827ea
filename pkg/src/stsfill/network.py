"""The two-input residual gap-filling network.

Graph: each input goes through its own 3x3 fusion conv (30 maps each,
concatenated to 60); a multi-scale block (3x3 / 5x5 / 7x7 branches of 20
maps, concatenated, plus an identity skip); a stack of five dilated 3x3
convs (dilations 1,2,3,2,1) with a boosting path injected after the first
and fourth and an identity skip over the whole stack; a final linear 3x3
conv maps back to the band count. The network predicts the residual
r = y1 - x, so reconstruction is x_hat = y1 - prediction composited with
the observed pixels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor_ops import (
    ConfigError,
    ConvGradients,
    ConvLayerParams,
    ShapeError,
    check_tensor4,
    concat_channels,
    conv2d_backward_raw,
    conv2d_raw,
    relu,
    relu_backward,
)

DILATED_NAMES = ("d1", "d2", "d3", "d4", "d5")


@dataclass
class NetworkConfig:
    input_bands: int
    fusion_channels: int = 30
    multiscale_channels: int = 20
    dilated_layers: tuple[int, ...] = (1, 2, 3, 2, 1)
    trunk_channels: int = 60
    # ablation switches; both True for the full model
    multiscale: bool = True
    boost: bool = True

    def __post_init__(self):
        self.dilated_layers = tuple(self.dilated_layers)
        if self.input_bands < 1:
            raise ConfigError("input_bands must be >= 1")
        if 2 * self.fusion_channels != self.trunk_channels:
            raise ConfigError(
                f"trunk_channels ({self.trunk_channels}) must be twice "
                f"fusion_channels ({self.fusion_channels})"
            )
        if self.multiscale and 3 * self.multiscale_channels != self.trunk_channels:
            raise ConfigError(
                f"trunk_channels ({self.trunk_channels}) must be three times "
                f"multiscale_channels ({self.multiscale_channels})"
            )
        if not self.dilated_layers or any(d < 1 for d in self.dilated_layers):
            raise ConfigError("dilated_layers must be non-empty with factors >= 1")


@dataclass
class NetworkParams:
    """Ordered conv layers realizing the graph, keyed by role name."""

    config: NetworkConfig
    layers: dict[str, ConvLayerParams]

    def layer_names(self) -> list[str]:
        return list(self.layers)

    def num_parameters(self) -> int:
        return sum(p.weights.size + p.biases.size for p in self.layers.values())

    def astype(self, dtype) -> "NetworkParams":
        return NetworkParams(
            self.config,
            {
                k: ConvLayerParams(
                    p.weights.astype(dtype),
                    p.biases.astype(dtype),
                    p.dilation,
                    p.activation,
                    p.name,
                )
                for k, p in self.layers.items()
            },
        )


@dataclass
class TrainingSample:
    """One (ground truth, corrupted, auxiliary, mask) quadruple, N=1 tensors."""

    x: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    mask: np.ndarray  # (H, W), 1 = valid

    def __post_init__(self):
        for name, t in (("x", self.x), ("y1", self.y1), ("y2", self.y2)):
            check_tensor4(t, name)
        if not (self.x.shape == self.y1.shape == self.y2.shape):
            raise ShapeError(
                f"sample tensors disagree: x {self.x.shape}, y1 {self.y1.shape}, "
                f"y2 {self.y2.shape}"
            )
        if self.mask.shape != self.x.shape[2:]:
            raise ShapeError(
                f"mask {self.mask.shape} does not match spatial dims {self.x.shape[2:]}"
            )


def _he_conv(rng, name, out_ch, in_ch, size, dilation=1, activation="relu", dtype=np.float64):
    fan_in = in_ch * size * size
    w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_ch, in_ch, size, size))
    return ConvLayerParams(
        w.astype(dtype), np.zeros(out_ch, dtype=dtype), dilation, activation, name
    )


def build_network(
    config: NetworkConfig, seed: int, dtype=np.float64, zero_output_init: bool = True
) -> NetworkParams:
    """Gaussian (He) init, zero biases, deterministic for a given seed.

    The final conv is zero-initialized by default so the net starts from
    the identity residual (prediction 0), which stabilizes plain SGD at
    small scale; pass zero_output_init=False for fully Gaussian layers.
    """
    rng = np.random.default_rng(seed)
    B, T = config.input_bands, config.trunk_channels
    layers: dict[str, ConvLayerParams] = {}
    layers["conv_y1"] = _he_conv(rng, "conv_y1", config.fusion_channels, B, 3, dtype=dtype)
    layers["conv_y2"] = _he_conv(rng, "conv_y2", config.fusion_channels, B, 3, dtype=dtype)
    if config.multiscale:
        mc = config.multiscale_channels
        layers["ms3"] = _he_conv(rng, "ms3", mc, T, 3, dtype=dtype)
        layers["ms5"] = _he_conv(rng, "ms5", mc, T, 5, dtype=dtype)
        layers["ms7"] = _he_conv(rng, "ms7", mc, T, 7, dtype=dtype)
    else:
        layers["ms0"] = _he_conv(rng, "ms0", T, T, 3, dtype=dtype)
    if config.boost:
        layers["boost_conv"] = _he_conv(rng, "boost_conv", T, B, 3, dtype=dtype)
    for nm, dil in zip(DILATED_NAMES, config.dilated_layers):
        layers[nm] = _he_conv(rng, nm, T, T, 3, dilation=dil, dtype=dtype)
    layers["output_conv"] = _he_conv(rng, "output_conv", B, T, 3, activation="linear", dtype=dtype)
    if zero_output_init:
        layers["output_conv"].weights[:] = 0.0
    return NetworkParams(config, layers)


def _mask4(mask: np.ndarray, like: np.ndarray) -> np.ndarray:
    """Lift a (H, W) or (N, H, W) mask to 4-D for broadcasting."""
    m = mask.astype(like.dtype)
    return m[None, None] if m.ndim == 2 else m[:, None]


def _mask_ok(mask: np.ndarray, y1: np.ndarray) -> bool:
    if mask.ndim == 2:
        return mask.shape == y1.shape[2:]
    return mask.ndim == 3 and mask.shape == (y1.shape[0],) + y1.shape[2:]


def gap_filled_composite(y1: np.ndarray, y2: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """y1 with its missing pixels taken from y2."""
    m = _mask4(mask, y1)
    return y1 + (1.0 - m) * y2


def forward(
    params: NetworkParams,
    y1: np.ndarray,
    y2: np.ndarray,
    mask: np.ndarray,
    return_cache: bool = False,
):
    """Predict the residual y1 - x. Returns (prediction, cache) if asked."""
    check_tensor4(y1, "y1")
    check_tensor4(y2, "y2")
    if y1.shape != y2.shape:
        raise ShapeError(f"fusion junction: y1 {y1.shape} vs y2 {y2.shape}")
    if not _mask_ok(mask, y1):
        raise ShapeError(
            f"mask junction: mask {mask.shape} vs input dims {y1.shape}"
        )
    L = params.layers
    cache: dict[str, np.ndarray] = {"y1": y1, "y2": y2}

    z1 = conv2d_raw(y1, L["conv_y1"])
    z2 = conv2d_raw(y2, L["conv_y2"])
    t0 = concat_channels([relu(z1), relu(z2)])
    cache.update(z1=z1, z2=z2, t0=t0)

    if params.config.multiscale:
        zm3 = conv2d_raw(t0, L["ms3"])
        zm5 = conv2d_raw(t0, L["ms5"])
        zm7 = conv2d_raw(t0, L["ms7"])
        t1 = concat_channels([relu(zm3), relu(zm5), relu(zm7)]) + t0
        cache.update(zms3=zm3, zms5=zm5, zms7=zm7)
    else:
        zm0 = conv2d_raw(t0, L["ms0"])
        t1 = relu(zm0) + t0
        cache.update(zms0=zm0)
    cache["t1"] = t1

    if params.config.boost:
        filled = gap_filled_composite(y1, y2, mask)
        zb = conv2d_raw(filled, L["boost_conv"])
        boost = relu(zb)
        cache.update(filled=filled, zb=zb)
    else:
        boost = None

    u = t1
    for i, nm in enumerate(DILATED_NAMES):
        zu = conv2d_raw(u, L[nm])
        u = relu(zu)
        cache[f"z{nm}"] = zu
        if boost is not None and i in (0, 3):  # after the first and fourth
            u = u + boost
        cache[f"u{nm}"] = u
    u = u + t1  # identity skip over the dilated stack
    cache["u_final"] = u

    out = conv2d_raw(u, L["output_conv"])
    if return_cache:
        return out, cache
    return out


def loss_mse(residual_hat: np.ndarray, y1: np.ndarray, x: np.ndarray) -> float:
    """(1/2N) sum ||residual_hat - (y1 - x)||^2, N = batch size."""
    if residual_hat.shape != y1.shape or y1.shape != x.shape:
        raise ShapeError(
            f"loss: shapes {residual_hat.shape}, {y1.shape}, {x.shape} disagree"
        )
    diff = residual_hat - (y1 - x)
    return float(np.sum(diff * diff) / (2 * x.shape[0]))


def loss_mse_per_pixel(residual_hat: np.ndarray, y1: np.ndarray, x: np.ndarray) -> float:
    """Per-pixel-normalized variant, for comparable logging across sizes."""
    diff = residual_hat - (y1 - x)
    return float(np.mean(diff * diff) / 2)


def backward(
    params: NetworkParams,
    sample_x: np.ndarray,
    residual_hat: np.ndarray,
    cache: dict[str, np.ndarray],
) -> dict[str, ConvGradients]:
    """Gradients of loss_mse for every layer; skip junctions sum gradients."""
    if "u_final" not in cache:
        raise RuntimeError("backward called without forward cache")
    L = params.layers
    y1, y2 = cache["y1"], cache["y2"]
    N = sample_x.shape[0]
    grads: dict[str, ConvGradients] = {}

    d_out = (residual_hat - (y1 - sample_x)) / N
    g = conv2d_backward_raw(cache["u_final"], L["output_conv"], d_out)
    grads["output_conv"] = g
    d_u = g.d_input

    d_t1 = d_u.copy()  # stack identity skip
    d_boost = None

    for i in (4, 3, 2, 1, 0):
        nm = DILATED_NAMES[i]
        if params.config.boost and i in (0, 3):
            d_boost = d_u if d_boost is None else d_boost + d_u
        d_z = relu_backward(cache[f"z{nm}"], d_u)
        src = cache["t1"] if i == 0 else cache[f"u{DILATED_NAMES[i - 1]}"]
        g = conv2d_backward_raw(src, L[nm], d_z)
        grads[nm] = g
        d_u = g.d_input
    d_t1 = d_t1 + d_u

    if params.config.boost:
        d_zb = relu_backward(cache["zb"], d_boost)
        grads["boost_conv"] = conv2d_backward_raw(cache["filled"], L["boost_conv"], d_zb)

    d_t0 = d_t1.copy()  # multi-scale identity skip
    if params.config.multiscale:
        mc = params.config.multiscale_channels
        for k, nm in enumerate(("ms3", "ms5", "ms7")):
            d_branch = d_t1[:, k * mc : (k + 1) * mc]
            d_z = relu_backward(cache[f"z{nm}"], d_branch)
            g = conv2d_backward_raw(cache["t0"], L[nm], d_z)
            grads[nm] = g
            d_t0 = d_t0 + g.d_input
    else:
        d_z = relu_backward(cache["zms0"], d_t1)
        g = conv2d_backward_raw(cache["t0"], L["ms0"], d_z)
        grads["ms0"] = g
        d_t0 = d_t0 + g.d_input

    fc = params.config.fusion_channels
    d_z1 = relu_backward(cache["z1"], d_t0[:, :fc])
    d_z2 = relu_backward(cache["z2"], d_t0[:, fc:])
    grads["conv_y1"] = conv2d_backward_raw(y1, L["conv_y1"], d_z1)
    grads["conv_y2"] = conv2d_backward_raw(y2, L["conv_y2"], d_z2)
    return grads


def reconstruct(
    params: NetworkParams,
    y1: np.ndarray,
    y2: np.ndarray,
    mask: np.ndarray,
    clamp: tuple[float, float] = (0.0, 1.0),
) -> np.ndarray:
    """x_hat = y1 - predicted residual on gaps, observed pixels verbatim."""
    residual_hat = forward(params, y1, y2, mask)
    x_raw = np.clip(y1 - residual_hat, clamp[0], clamp[1])
    valid = (mask != 0)[None, None] if mask.ndim == 2 else (mask != 0)[:, None]
    return np.where(valid, y1, x_raw)
