"""File formats: the STSR binary tensor container, PGM/PPM export,
checkpoint directories (tensor files + JSON manifest).

STSR layout: magic "STSR" | version u32 LE | dtype u8 (0=f32, 1=f64) |
ndim u8 (=4) | dims 4*u32 LE | row-major little-endian payload.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .tensor_ops import ConvLayerParams, check_tensor4

MAGIC = b"STSR"
VERSION = 1
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
HEADER_SIZE = 4 + 4 + 1 + 1 + 16

CHECKPOINT_FORMAT_VERSION = 1


class TensorFileError(ValueError):
    """Malformed tensor file; the message names the offending field."""


def write_tensor(path, x: np.ndarray) -> None:
    check_tensor4(x, "tensor")
    code = _DTYPE_CODES.get(np.dtype(x.dtype))
    if code is None:
        raise TensorFileError(f"dtype: unsupported {x.dtype}, use float32/float64")
    header = MAGIC + struct.pack("<IBB4I", VERSION, code, 4, *x.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(x, dtype=_DTYPES[code]).tobytes())


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(HEADER_SIZE)
        if len(header) < HEADER_SIZE:
            raise TensorFileError(f"header: truncated at {len(header)} bytes")
        if header[:4] != MAGIC:
            raise TensorFileError(f"magic: expected {MAGIC!r}, got {header[:4]!r}")
        version, code, ndim, *dims = struct.unpack("<IBB4I", header[4:])
        if version != VERSION:
            raise TensorFileError(f"version: unsupported {version}")
        if code not in _DTYPES:
            raise TensorFileError(f"dtype: unknown code {code}")
        if ndim != 4:
            raise TensorFileError(f"ndim: expected 4, got {ndim}")
        dtype = _DTYPES[code]
        count = int(np.prod(dims))
        payload = f.read(count * dtype.itemsize + 1)
    if len(payload) != count * dtype.itemsize:
        raise TensorFileError(
            f"payload: expected {count * dtype.itemsize} bytes, got {len(payload)}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(dims).astype(dtype.newbyteorder("="))


def export_image(x: np.ndarray, bands, path, data_range: tuple[float, float] = (0.0, 1.0)) -> None:
    """Write band(s) of a (N,C,H,W) tensor as binary PGM (1 band) or PPM (3)."""
    check_tensor4(x, "x")
    if isinstance(bands, int):
        bands = [bands]
    for b in bands:
        if not 0 <= b < x.shape[1]:
            raise ValueError(f"band {b} out of range [0, {x.shape[1]})")
    if len(bands) not in (1, 3):
        raise ValueError("export_image takes one band (PGM) or an rgb triple (PPM)")
    lo, hi = data_range
    img = x[0, bands]  # (1 or 3, H, W)
    scaled = np.clip((img - lo) / (hi - lo) * 255.0, 0, 255).round().astype(np.uint8)
    H, W = scaled.shape[1:]
    if len(bands) == 1:
        header = f"P5\n{W} {H}\n255\n".encode()
        body = scaled[0].tobytes()
    else:
        header = f"P6\n{W} {H}\n255\n".encode()
        body = scaled.transpose(1, 2, 0).tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(body)


# --- checkpoints ------------------------------------------------------------

def save_checkpoint(params, path) -> None:
    """Write a checkpoint directory: manifest.json + one STSR file per tensor.

    Biases are stored as (1, J, 1, 1) tensors to fit the 4-D container.
    """
    from .network import NetworkParams  # late import to avoid a cycle

    assert isinstance(params, NetworkParams)
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": {
            "input_bands": params.config.input_bands,
            "fusion_channels": params.config.fusion_channels,
            "multiscale_channels": params.config.multiscale_channels,
            "dilated_layers": list(params.config.dilated_layers),
            "trunk_channels": params.config.trunk_channels,
            "multiscale": params.config.multiscale,
            "boost": params.config.boost,
        },
        "layers": [],
    }
    for i, (name, layer) in enumerate(params.layers.items()):
        wfile = f"{i:02d}_{name}_weights.stsr"
        bfile = f"{i:02d}_{name}_biases.stsr"
        write_tensor(path / wfile, layer.weights)
        write_tensor(path / bfile, layer.biases.reshape(1, -1, 1, 1))
        manifest["layers"].append(
            {
                "name": name,
                "weights": wfile,
                "biases": bfile,
                "shape": list(layer.weights.shape),
                "dilation": layer.dilation,
                "activation": layer.activation,
            }
        )
    with open(path / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)


def load_checkpoint(path):
    from .network import NetworkConfig, NetworkParams

    path = Path(path)
    mf = path / "manifest.json"
    if not mf.exists():
        raise TensorFileError(f"manifest: missing {mf}")
    with open(mf) as f:
        manifest = json.load(f)
    if manifest.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise TensorFileError(
            f"format_version: unsupported {manifest.get('format_version')}"
        )
    config = NetworkConfig(**manifest["config"])
    layers = {}
    for entry in manifest["layers"]:
        w = read_tensor(path / entry["weights"])
        b = read_tensor(path / entry["biases"]).reshape(-1)
        layers[entry["name"]] = ConvLayerParams(
            w, b, entry["dilation"], entry["activation"], entry["name"]
        )
    return NetworkParams(config, layers)
