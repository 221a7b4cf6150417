"""Minimal feedforward clusterer: linear layers, relu/tanh, softmax head.

Forward and reverse passes are hand-written numpy; the reverse pass takes the
gradient at the logits (produced by the loss module) and returns per-layer
parameter gradients. Checkpoints round-trip exactly through JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataio import atomic_write_text
from .errors import InvalidInputError, InvalidSpecError
from .loss import SoftAssignment, row_softmax

_ACTIVATIONS = ("relu", "tanh")
_CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture: layer widths input -> hidden... -> k, plus hidden nonlinearity."""

    layer_sizes: tuple[int, ...]
    hidden_activation: str = "relu"
    seed: int | None = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise InvalidSpecError("layer_sizes needs at least an input and an output width")
        if any(s < 1 for s in sizes):
            raise InvalidSpecError("layer widths must be positive")
        if sizes[-1] < 2:
            raise InvalidSpecError("output width is the number of groups and must be >= 2")
        if self.hidden_activation not in _ACTIVATIONS:
            raise InvalidSpecError(
                f"hidden_activation must be one of {_ACTIVATIONS}, got {self.hidden_activation!r}"
            )

    @property
    def n_groups(self) -> int:
        return self.layer_sizes[-1]


@dataclass
class NetworkParams:
    """Per-layer weight matrices (fan_in, fan_out) and bias vectors."""

    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    def arrays(self) -> list:
        """Flat list view (weights then bias per layer) for optimizers."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "NetworkParams":
        return NetworkParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_params(spec: NetworkSpec, seed: int | None = None) -> NetworkParams:
    """Scaled-uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).

    ``seed`` overrides ``spec.seed``; with neither set, a fixed default keeps
    initialization deterministic.
    """
    effective = seed if seed is not None else (spec.seed if spec.seed is not None else 0)
    rng = np.random.default_rng(effective)
    params = NetworkParams()
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        params.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        params.biases.append(rng.uniform(-bound, bound, size=fan_out))
    return params


def _check_features(params: NetworkParams, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError("features must be a 2-D (n, m) matrix")
    if x.shape[1] != params.weights[0].shape[0]:
        raise InvalidInputError(
            f"feature width {x.shape[1]} does not match network input "
            f"width {params.weights[0].shape[0]}"
        )
    return x


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def forward_cached(params: NetworkParams, features, activation: str = "relu"):
    """Logits plus the per-layer inputs and pre-activations for backprop."""
    x = _check_features(params, features)
    inputs = [x]
    pre = []
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        if i < last:
            h = _activate(z, activation)
            inputs.append(h)
    return pre[-1], inputs, pre


def forward(params: NetworkParams, features, activation: str = "relu") -> SoftAssignment:
    """Row-stochastic group probabilities: softmax over the final logits."""
    logits, _, _ = forward_cached(params, features, activation)
    return SoftAssignment(row_softmax(logits))


def backward_from_logits(params: NetworkParams, inputs, pre, grad_logits, activation: str = "relu"):
    """Per-layer (grad_weights, grad_biases) from the gradient at the logits."""
    n_layers = len(params.weights)
    grad_w = [None] * n_layers
    grad_b = [None] * n_layers
    g = np.asarray(grad_logits, dtype=np.float64)
    for i in range(n_layers - 1, -1, -1):
        grad_w[i] = inputs[i].T @ g
        grad_b[i] = g.sum(axis=0)
        if i > 0:
            g = g @ params.weights[i].T
            if activation == "relu":
                g = g * (pre[i - 1] > 0.0)
            else:
                g = g * (1.0 - np.tanh(pre[i - 1]) ** 2)
    return grad_w, grad_b


def predict_labels(params: NetworkParams, features, activation: str = "relu") -> np.ndarray:
    """Hard labels: argmax of the forward probabilities, ties to the lowest index."""
    return np.argmax(forward(params, features, activation).probs, axis=1)


def save_checkpoint(path, spec: NetworkSpec, params: NetworkParams, extra: dict | None = None):
    """Write a versioned JSON checkpoint; floats round-trip exactly."""
    payload = {
        "schema_version": _CHECKPOINT_VERSION,
        "layer_sizes": list(spec.layer_sizes),
        "hidden_activation": spec.hidden_activation,
        "seed": spec.seed,
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
    }
    if extra:
        payload.update(extra)
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_checkpoint(path) -> tuple[NetworkSpec, NetworkParams]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("schema_version")
    if version != _CHECKPOINT_VERSION:
        raise InvalidInputError(f"unsupported checkpoint schema_version {version!r}")
    spec = NetworkSpec(
        tuple(payload["layer_sizes"]),
        payload["hidden_activation"],
        payload["seed"],
    )
    params = NetworkParams(
        [np.array(w, dtype=np.float64) for w in payload["weights"]],
        [np.array(b, dtype=np.float64) for b in payload["biases"]],
    )
    return spec, params
