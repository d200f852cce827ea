"""Dense 4-D tensor primitives: dilated convolution, ReLU, concat, SGD.

All tensors are numpy arrays of shape (N, C, H, W). Convolutions are
"same"-padded cross-correlations; the dilation factor spaces the kernel
taps. Forward/backward are implemented with an im2col GEMM; the tests
check them against a direct six-loop reference and finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Tensor dimensions incompatible with the requested operation."""


class ConfigError(ValueError):
    """Layer or network configuration violates a structural constraint."""


class NumericError(ArithmeticError):
    """Non-finite value encountered where the math guarantees finiteness."""


def check_tensor4(x: np.ndarray, name: str = "tensor") -> np.ndarray:
    if x.ndim != 4:
        raise ShapeError(f"{name}: expected 4 dims (N,C,H,W), got {x.ndim}")
    return x


@dataclass
class ConvLayerParams:
    """One convolution layer: weights (out, in, S, S), biases (out,)."""

    weights: np.ndarray
    biases: np.ndarray
    dilation: int = 1
    activation: str = "relu"
    name: str = ""

    def __post_init__(self):
        if self.weights.ndim != 4 or self.weights.shape[2] != self.weights.shape[3]:
            raise ShapeError(
                f"{self.name or 'conv'}: weights must be (out,in,S,S), "
                f"got {self.weights.shape}"
            )
        if self.kernel_size % 2 == 0:
            raise ConfigError(
                f"{self.name or 'conv'}: kernel size must be odd, got {self.kernel_size}"
            )
        if self.dilation < 1:
            raise ConfigError(f"{self.name or 'conv'}: dilation must be >= 1")
        if self.activation not in ("relu", "linear"):
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.biases.shape != (self.out_channels,):
            raise ShapeError(
                f"{self.name or 'conv'}: biases shape {self.biases.shape} != "
                f"({self.out_channels},)"
            )

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weights.shape[2]

    @property
    def same_pad(self) -> int:
        return self.dilation * (self.kernel_size - 1) // 2


@dataclass
class ConvGradients:
    """Gradients of one conv layer plus the gradient w.r.t. its input."""

    d_weights: np.ndarray
    d_biases: np.ndarray
    d_input: np.ndarray | None = None


def _im2col(xp: np.ndarray, S: int, d: int, H: int, W: int) -> np.ndarray:
    """Gather kernel taps from the padded input.

    Returns (N, C*S*S, H*W); tap order is (channel, u, v) row-major, which
    matches weights.reshape(out, -1).
    """
    N, C = xp.shape[:2]
    cols = np.empty((N, C, S, S, H, W), dtype=xp.dtype)
    for u in range(S):
        for v in range(S):
            cols[:, :, u, v] = xp[:, :, u * d : u * d + H, v * d : v * d + W]
    return cols.reshape(N, C * S * S, H * W)


def conv2d_raw(x: np.ndarray, layer: ConvLayerParams, padding: int | None = None) -> np.ndarray:
    """Cross-correlation + bias, no activation."""
    check_tensor4(x, "conv input")
    if x.shape[1] != layer.in_channels:
        raise ShapeError(
            f"{layer.name or 'conv'}: input has {x.shape[1]} channels, "
            f"layer expects {layer.in_channels}"
        )
    S, d = layer.kernel_size, layer.dilation
    pad = layer.same_pad if padding is None else padding
    N, _, H, W = x.shape
    extent = d * (S - 1) + 1
    if extent > H + 2 * pad or extent > W + 2 * pad:
        raise ShapeError(
            f"{layer.name or 'conv'}: effective kernel extent {extent} exceeds "
            f"padded input {H + 2 * pad}x{W + 2 * pad}"
        )
    Ho, Wo = H + 2 * pad - extent + 1, W + 2 * pad - extent + 1
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, S, d, Ho, Wo)
    wmat = layer.weights.reshape(layer.out_channels, -1)
    out = wmat @ cols  # (N, J, Ho*Wo) via broadcasting over N
    out += layer.biases[None, :, None]
    return out.reshape(N, layer.out_channels, Ho, Wo)


def conv2d_forward(x: np.ndarray, layer: ConvLayerParams, padding: int | None = None) -> np.ndarray:
    """Convolution with the layer's activation applied."""
    z = conv2d_raw(x, layer, padding)
    return relu(z) if layer.activation == "relu" else z


def conv2d_backward_raw(
    x: np.ndarray, layer: ConvLayerParams, d_z: np.ndarray, padding: int | None = None
) -> ConvGradients:
    """Backward through the linear part, given the pre-activation gradient."""
    S, d = layer.kernel_size, layer.dilation
    pad = layer.same_pad if padding is None else padding
    N, C, H, W = x.shape
    _, J, Ho, Wo = d_z.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, S, d, Ho, Wo)  # (N, C*S*S, Ho*Wo)
    dz = d_z.reshape(N, J, Ho * Wo)

    d_b = dz.sum(axis=(0, 2))
    d_w = np.einsum("njp,nkp->jk", dz, cols, optimize=True).reshape(layer.weights.shape)

    wmat = layer.weights.reshape(J, -1)
    d_cols = (wmat.T @ dz).reshape(N, C, S, S, Ho, Wo)
    d_xp = np.zeros_like(xp)
    for u in range(S):
        for v in range(S):
            d_xp[:, :, u * d : u * d + Ho, v * d : v * d + Wo] += d_cols[:, :, u, v]
    d_x = d_xp[:, :, pad : pad + H, pad : pad + W] if pad else d_xp
    return ConvGradients(d_w, d_b, d_x)


def conv2d_backward(
    x: np.ndarray, layer: ConvLayerParams, upstream_grad: np.ndarray, padding: int | None = None
) -> ConvGradients:
    """Gradients w.r.t. weights, biases and input.

    upstream_grad is the loss gradient at the layer's (post-activation)
    output; the activation derivative is applied internally.
    """
    z = conv2d_raw(x, layer, padding)
    if upstream_grad.shape != z.shape:
        raise ShapeError(
            f"{layer.name or 'conv'}: upstream grad shape {upstream_grad.shape} "
            f"!= forward output {z.shape}"
        )
    d_z = relu_backward(z, upstream_grad) if layer.activation == "relu" else upstream_grad
    return conv2d_backward_raw(x, layer, d_z, padding)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Derivative at exactly 0 is taken as 0."""
    return np.where(x > 0, upstream, 0.0)


def concat_channels(parts: list[np.ndarray]) -> np.ndarray:
    if not parts:
        raise ShapeError("concat_channels: empty part list")
    ref = parts[0].shape
    for k, p in enumerate(parts):
        check_tensor4(p, f"part {k}")
        if p.shape[0] != ref[0] or p.shape[2:] != ref[2:]:
            raise ShapeError(
                f"concat_channels: part {k} shape {p.shape} incompatible with {ref}"
            )
    return np.concatenate(parts, axis=1)


def elementwise(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """add/sub/mul; b may be single-channel and broadcasts across channels."""
    check_tensor4(a, "a")
    check_tensor4(b, "b")
    if a.shape != b.shape and not (
        b.shape[1] == 1 and b.shape[0] == a.shape[0] and b.shape[2:] == a.shape[2:]
    ):
        raise ShapeError(f"elementwise {op}: shapes {a.shape} vs {b.shape}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ConfigError(f"unknown elementwise op {op!r}")


def receptive_field(depth: int, mode: str) -> int:
    """Side length of the receptive field after `depth` 3x3 conv layers.

    common: stacked undilated convs. dilated_pyramid: dilation doubling
    per layer (1, 2, 4, ...), the exponential-growth regime.
    """
    if depth < 1:
        raise ValueError(f"receptive_field: depth must be >= 1, got {depth}")
    if mode == "common":
        return 2 * depth + 1
    if mode == "dilated_pyramid":
        return 2 ** (depth + 1) - 1
    raise ValueError(f"receptive_field: unknown mode {mode!r}")


# --- SGD with classical momentum -------------------------------------------

@dataclass
class Velocity:
    """Per-layer momentum buffers, shape-matching the layer parameters."""

    v_weights: dict[str, np.ndarray] = field(default_factory=dict)
    v_biases: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, layers: dict[str, ConvLayerParams]) -> "Velocity":
        return cls(
            {k: np.zeros_like(p.weights) for k, p in layers.items()},
            {k: np.zeros_like(p.biases) for k, p in layers.items()},
        )


def sgd_step(
    layers: dict[str, ConvLayerParams],
    grads: dict[str, ConvGradients],
    lr: float,
    momentum: float,
    velocity: Velocity,
) -> None:
    """v <- momentum*v - lr*g; w <- w + v.  Updates in place."""
    if lr <= 0:
        raise ValueError(f"sgd_step: lr must be > 0, got {lr}")
    if not 0 <= momentum < 1:
        raise ValueError(f"sgd_step: momentum must be in [0,1), got {momentum}")
    for name, layer in layers.items():
        g = grads[name]
        if not (np.isfinite(g.d_weights).all() and np.isfinite(g.d_biases).all()):
            raise NumericError(f"non-finite gradient in layer {name!r}")
        vw, vb = velocity.v_weights[name], velocity.v_biases[name]
        vw *= momentum
        vw -= lr * g.d_weights
        vb *= momentum
        vb -= lr * g.d_biases
        layer.weights += vw
        layer.biases += vb
