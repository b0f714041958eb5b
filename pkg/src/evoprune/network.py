"""Dense feedforward network used as the fitness substrate for pruning.

Weights of layer k have shape (fan_in, fan_out) and biases shape
(fan_out,), all float64. The canonical flattening order used by masks and
importance vectors everywhere in this package is: prunable layers in
network order, each layer's weight matrix raveled row-major. Biases are
never part of the prunable universe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyDataError,
    FormatError,
    InvalidIntervalError,
    InvalidSpecError,
    ShapeError,
)

CHECKPOINT_VERSION = 1


@dataclass
class Layer:
    name: str
    weights: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)
    prunable: bool = True

    def copy(self) -> "Layer":
        return Layer(self.name, self.weights.copy(), self.bias.copy(), self.prunable)


@dataclass
class Network:
    layers: list[Layer]
    activation: str = "relu"

    def copy(self) -> "Network":
        return Network([l.copy() for l in self.layers], self.activation)

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[0]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[1]


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 1e-4
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise InvalidSpecError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise InvalidSpecError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise InvalidSpecError(f"batch_size must be >= 1, got {self.batch_size}")


def init_network(
    layer_widths: list[int], seed: int, first_layer_prunable: bool = False
) -> Network:
    """Build a network with uniform fan-in-scaled weights and zero biases.

    The first layer defaults to non-prunable so that low-level feature
    extraction survives pruning untouched.
    """
    if len(layer_widths) < 2:
        raise InvalidSpecError(f"need at least 2 layer widths, got {len(layer_widths)}")
    if any(w < 1 for w in layer_widths):
        raise InvalidSpecError(f"layer widths must be positive, got {layer_widths}")
    rng = np.random.default_rng(seed)
    layers = []
    for k in range(len(layer_widths) - 1):
        fan_in, fan_out = layer_widths[k], layer_widths[k + 1]
        limit = 1.0 / np.sqrt(fan_in)
        weights = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        bias = np.zeros(fan_out)
        prunable = first_layer_prunable if k == 0 else True
        layers.append(Layer(f"dense{k + 1}", weights, bias, prunable))
    return Network(layers)


def forward(net: Network, batch: np.ndarray) -> np.ndarray:
    """Logits for a (rows, input_dim) batch; hidden layers use ReLU.

    The contraction runs through einsum rather than BLAS matmul so each
    row's result is independent of the batch it arrives in (bit-exact
    row decomposability, and immunity to BLAS threading).
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise ShapeError(
            f"batch shape {batch.shape} incompatible with input width {net.input_dim}"
        )
    h = batch
    last = len(net.layers) - 1
    for k, layer in enumerate(net.layers):
        h = np.einsum("bi,ij->bj", h, layer.weights) + layer.bias
        if k < last:
            h = np.maximum(h, 0.0)
    return h


def accuracy(net: Network, data) -> float:
    """Fraction of argmax predictions equal to the labels.

    Argmax ties resolve to the lowest class index.
    """
    if len(data.labels) == 0:
        raise EmptyDataError("cannot score an empty dataset")
    logits = forward(net, data.features)
    pred = np.argmax(logits, axis=1)
    return float(np.mean(pred == data.labels))


def nonzero_count(net: Network) -> int:
    """Strictly nonzero weight entries over prunable layers; biases excluded."""
    return int(sum(np.count_nonzero(l.weights) for l in net.layers if l.prunable))


def prunable_weight_bounds(net: Network) -> tuple[float, float]:
    """(min, max) over all prunable-layer weight values."""
    chunks = [l.weights.ravel() for l in net.layers if l.prunable]
    if not chunks:
        raise InvalidSpecError("network has no prunable layers")
    flat = np.concatenate(chunks)
    return float(flat.min()), float(flat.max())


def prunable_layers(net: Network) -> list[Layer]:
    return [l for l in net.layers if l.prunable]


def apply_threshold(net: Network, th1: float, th2: float) -> Network:
    """Copy of net with every prunable weight w in [th1, th2] zeroed."""
    if th1 > th2:
        raise InvalidIntervalError(f"th1={th1!r} > th2={th2!r}; repair the genome first")
    out = net.copy()
    for layer in out.layers:
        if not layer.prunable:
            continue
        w = layer.weights
        w[(w >= th1) & (w <= th2)] = 0.0
    return out


def apply_mask(net: Network, mask: np.ndarray) -> Network:
    """Copy of net where the j-th nonzero prunable weight is zeroed iff mask[j] == 0.

    Mask positions follow the canonical flattening order.
    """
    mask = np.asarray(mask)
    expected = nonzero_count(net)
    if mask.ndim != 1 or len(mask) != expected:
        raise ShapeError(f"mask length {mask.shape} != nonzero prunable count {expected}")
    out = net.copy()
    pos = 0
    for layer in out.layers:
        if not layer.prunable:
            continue
        flat = layer.weights.ravel()  # view, row-major
        nz = np.flatnonzero(flat)
        seg = mask[pos : pos + len(nz)]
        flat[nz[seg == 0]] = 0.0
        pos += len(nz)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _train_adam(net: Network, data, cfg: TrainConfig, freeze_zeros: bool) -> Network:
    cfg.validate()
    n = len(data.labels)
    if n == 0:
        raise EmptyDataError("cannot train on an empty dataset")
    labels = np.asarray(data.labels)
    if labels.min() < 0 or labels.max() >= data.classes:
        raise InvalidSpecError("labels out of range [0, classes)")

    out = net.copy()
    last = len(out.layers) - 1
    zero_masks = None
    if freeze_zeros:
        zero_masks = [
            (l.weights == 0.0) if l.prunable else None for l in out.layers
        ]

    params = []
    for l in out.layers:
        params.append(l.weights)
        params.append(l.bias)
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    t = 0

    rng = np.random.default_rng(cfg.seed)
    x_all = np.asarray(data.features, dtype=np.float64)
    onehot = np.eye(data.classes)[labels]

    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x, y = x_all[idx], onehot[idx]

            # forward, keeping pre/post activations for backprop
            acts = [x]
            pre = []
            h = x
            for k, layer in enumerate(out.layers):
                z = h @ layer.weights + layer.bias
                pre.append(z)
                h = np.maximum(z, 0.0) if k < last else z
                acts.append(h)

            # mean cross-entropy gradient at the logits
            g = (_softmax(acts[-1]) - y) / len(idx)

            grads = [None] * len(params)
            for k in range(last, -1, -1):
                grads[2 * k] = acts[k].T @ g
                grads[2 * k + 1] = g.sum(axis=0)
                if k > 0:
                    g = (g @ out.layers[k].weights.T) * (pre[k - 1] > 0.0)

            t += 1
            corr1 = 1.0 - cfg.beta1**t
            corr2 = 1.0 - cfg.beta2**t
            for j, p in enumerate(params):
                gj = grads[j]
                m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj
                v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj
                p -= cfg.learning_rate * (m[j] / corr1) / (np.sqrt(v[j] / corr2) + cfg.epsilon)

            if freeze_zeros:
                for k, layer in enumerate(out.layers):
                    if zero_masks[k] is not None:
                        layer.weights[zero_masks[k]] = 0.0
    return out


def train(net: Network, data, cfg: TrainConfig) -> Network:
    """Adam-trained copy of net; cross-entropy loss, deterministic per seed."""
    return _train_adam(net, data, cfg, freeze_zeros=False)


def finetune(net: Network, data, cfg: TrainConfig) -> Network:
    """Like train, but prunable weights that are exactly zero stay zero.

    Intended for polishing a user-selected pruned solution without
    disturbing its sparsity pattern.
    """
    return _train_adam(net, data, cfg, freeze_zeros=True)


def save_checkpoint(net: Network, path: str | Path, meta: dict | None = None) -> Path:
    """Write a checkpoint directory: manifest.json + one raw f8 blob per layer.

    Each blob holds the layer's weights (row-major) followed by its bias,
    as little-endian 64-bit reals; round-trips are bit-exact.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": CHECKPOINT_VERSION,
        "kind": "network-checkpoint",
        "activation": net.activation,
        "layers": [
            {
                "name": l.name,
                "rows": int(l.weights.shape[0]),
                "cols": int(l.weights.shape[1]),
                "prunable": bool(l.prunable),
            }
            for l in net.layers
        ],
        "meta": meta or {},
    }
    for layer in net.layers:
        blob = np.concatenate([layer.weights.ravel(), layer.bias]).astype("<f8")
        blob.tofile(path / f"{layer.name}.bin")
    with open(path / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_checkpoint(path: str | Path) -> tuple[Network, dict]:
    """Read a checkpoint directory; returns (network, meta)."""
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise FormatError(f"missing checkpoint manifest: {manifest_path}")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"corrupt checkpoint manifest {manifest_path}: {exc}") from exc
    version = manifest.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise FormatError(
            f"{manifest_path}: unsupported format_version {version!r} "
            f"(expected {CHECKPOINT_VERSION})"
        )
    layers = []
    for entry in manifest["layers"]:
        rows, cols = entry["rows"], entry["cols"]
        blob_path = path / f"{entry['name']}.bin"
        if not blob_path.exists():
            raise FormatError(f"missing checkpoint blob: {blob_path}")
        blob = np.fromfile(blob_path, dtype="<f8")
        if len(blob) != rows * cols + cols:
            raise FormatError(
                f"{blob_path}: expected {rows * cols + cols} values, got {len(blob)}"
            )
        weights = blob[: rows * cols].reshape(rows, cols).astype(np.float64)
        bias = blob[rows * cols :].astype(np.float64)
        layers.append(Layer(entry["name"], weights, bias, bool(entry["prunable"])))
    net = Network(layers, manifest.get("activation", "relu"))
    for a, b in zip(net.layers, net.layers[1:]):
        if a.weights.shape[1] != b.weights.shape[0]:
            raise FormatError(f"{manifest_path}: incompatible layer widths")
    return net, manifest.get("meta", {})
