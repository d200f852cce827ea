"""Tensor primitives: dilated convolution, its gradient, and receptive fields.

Run:  python3 demos/01_conv_primitives.py
"""

import numpy as np

from stsfill.tensor_ops import (
    ConvLayerParams,
    conv2d_backward,
    conv2d_forward,
    receptive_field,
)

rng = np.random.default_rng(0)

# --- a 3x3 dilated convolution keeps spatial size ("same" padding) ----------
x = rng.uniform(0, 1, (1, 2, 16, 16))
layer = ConvLayerParams(
    weights=rng.normal(0, 0.1, (4, 2, 3, 3)),
    biases=np.zeros(4),
    dilation=2,
    activation="relu",
    name="demo",
)
y = conv2d_forward(x, layer)
print(f"input  {x.shape} -> output {y.shape}  (dilation {layer.dilation})")

# --- analytic gradients vs a finite-difference probe ------------------------
d_out = rng.normal(0, 1, y.shape)
grads = conv2d_backward(x, layer, d_out)
eps = 1e-6
w0 = layer.weights[0, 0, 1, 1]
layer.weights[0, 0, 1, 1] = w0 + eps
up = np.sum(conv2d_forward(x, layer) * d_out)
layer.weights[0, 0, 1, 1] = w0 - eps
dn = np.sum(conv2d_forward(x, layer) * d_out)
layer.weights[0, 0, 1, 1] = w0
fd = (up - dn) / (2 * eps)
print(f"analytic dL/dw = {grads.d_weights[0, 0, 1, 1]:+.8f}, finite diff = {fd:+.8f}")

# --- receptive-field growth: plain stack vs dilation pyramid ----------------
print("\ndepth | common 3x3 stack | dilation-doubling pyramid")
for depth in range(1, 6):
    print(
        f"{depth:5d} | {receptive_field(depth, 'common'):16d} |"
        f" {receptive_field(depth, 'dilated_pyramid'):d}"
    )
