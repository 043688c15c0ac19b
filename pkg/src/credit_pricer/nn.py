"""Dense feed-forward networks with cached reverse-mode gradients.

Only what the pricing agent and the neural response model need: a stack of
fully connected layers, per-layer backward passes, Adam with decoupled weight
decay and a min-max feature scaler.  Everything is float64 numpy.

Checkpoint schema (JSON, ``format = "credit-pricer/network"``, ``version = 1``)::

    {
      "format": "credit-pricer/network",
      "version": 1,
      "layers": [
        {"in": 31, "out": 64, "activation": "relu", "dropout_rate": 0.2,
         "weights": [[...], ...],        # out x in, row major
         "biases": [...]},               # out
        ...
      ],
      "optimizer": null | {"learning_rate": ..., "beta1": ..., "beta2": ...,
                           "epsilon": ..., "weight_decay": ..., "step": 12,
                           "m": [...], "v": [...]}   # nested lists per parameter
    }

Floats are written with ``repr`` precision, so a save/load round trip is exact.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_finite
from .exceptions import NumericalError, ValidationError

__all__ = [
    "AdamState",
    "DenseLayer",
    "MinMaxScaler",
    "Network",
    "adam_step",
    "load_network",
    "save_network",
]

ACTIVATIONS = ("relu", "tanh", "identity")
CHECKPOINT_FORMAT = "credit-pricer/network"
CHECKPOINT_VERSION = 1


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _activation_grad(z: np.ndarray, out: np.ndarray, kind: str) -> np.ndarray | None:
    if kind == "relu":
        return (z > 0.0).astype(float)
    if kind == "tanh":
        return 1.0 - out * out
    return None


@dataclass
class DenseLayer:
    """``y = act(W x + b)`` followed by (training-only) inverted dropout."""

    weights: np.ndarray
    biases: np.ndarray
    activation: str = "relu"
    dropout_rate: float = 0.0

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=float, ndmin=2)
        self.biases = np.array(self.biases, dtype=float).reshape(-1)
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}")
        if self.weights.shape[0] != self.biases.shape[0]:
            raise ValidationError("bias length must equal the number of output units")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValidationError("dropout_rate must lie in [0, 1)")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


class Network:
    """A chain of :class:`DenseLayer` objects.

    The forward pass caches what the backward pass needs, so a network object
    has a single writer.  Inference-mode forward calls on separate copies are
    independent.
    """

    def __init__(self, layers: Sequence[DenseLayer]):
        layers = list(layers)
        if not layers:
            raise ValidationError("a network needs at least one layer")
        for prev, nxt in zip(layers[:-1], layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValidationError(
                    f"layer dimensions do not chain: {prev.out_dim} -> {nxt.in_dim}"
                )
        self.layers = layers
        self._cache = None
        self.input_grad = None

    @classmethod
    def build(
        cls,
        sizes: Sequence[int],
        activation: str = "relu",
        output_activation: str = "identity",
        dropout: float = 0.0,
        rng=None,
    ) -> "Network":
        """Glorot-uniform initialised MLP with layer widths ``sizes``.

        ``dropout`` is applied after every hidden activation, never on the
        output layer.
        """
        if len(sizes) < 2:
            raise ValidationError("sizes must list at least input and output widths")
        rng = np.random.default_rng(rng)
        layers = []
        n_layers = len(sizes) - 1
        for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            last = k == n_layers - 1
            layers.append(
                DenseLayer(
                    weights=rng.uniform(-limit, limit, size=(fan_out, fan_in)),
                    biases=np.zeros(fan_out),
                    activation=output_activation if last else activation,
                    dropout_rate=0.0 if last else dropout,
                )
            )
        return cls(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays (W1, b1, W2, b2, ...); updates happen in place."""
        params = []
        for layer in self.layers:
            params.extend((layer.weights, layer.biases))
        return params

    def copy(self) -> "Network":
        return Network(
            [
                DenseLayer(l.weights.copy(), l.biases.copy(), l.activation, l.dropout_rate)
                for l in self.layers
            ]
        )

    def forward(self, x, training: bool = False, rng=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValidationError(
                f"input dimension {x.shape[-1]} does not match network input {self.in_dim}"
            )
        check_finite(x, "network input")
        if training and rng is None and any(l.dropout_rate > 0 for l in self.layers):
            raise ValidationError("training-mode dropout needs an rng")

        cache = []
        h = x
        for layer in self.layers:
            z = h @ layer.weights.T + layer.biases
            act = _activate(z, layer.activation)
            mask = None
            out = act
            if training and layer.dropout_rate > 0.0:
                keep = 1.0 - layer.dropout_rate
                mask = (rng.random(act.shape) < keep) / keep
                out = act * mask
            cache.append((h, z, act, mask))
            h = out
        self._cache = cache
        return h[0] if squeeze else h

    def backward(self, grad_output) -> list[np.ndarray]:
        """Gradients of a scalar loss w.r.t. every parameter.

        ``grad_output`` is dLoss/dOutput for the most recent forward pass.
        The gradient w.r.t. the network input is left in ``self.input_grad``.
        """
        if self._cache is None:
            raise ValidationError("backward() called without a cached forward pass")
        g = np.asarray(grad_output, dtype=float)
        if g.ndim == 1:
            g = g[None, :]
        grads: list[np.ndarray] = []
        for layer, (h, z, act, mask) in zip(reversed(self.layers), reversed(self._cache)):
            if g.shape != act.shape:
                raise ValidationError("upstream gradient shape does not match layer output")
            if mask is not None:
                g = g * mask
            local = _activation_grad(z, act, layer.activation)
            if local is not None:
                g = g * local
            grads.append(g.sum(axis=0))
            grads.append(g.T @ h)
            g = g @ layer.weights
        grads.reverse()
        self.input_grad = g
        return grads

    def to_dict(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "layers": [
                {
                    "in": l.in_dim,
                    "out": l.out_dim,
                    "activation": l.activation,
                    "dropout_rate": l.dropout_rate,
                    "weights": l.weights.tolist(),
                    "biases": l.biases.tolist(),
                }
                for l in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Network":
        if data.get("format") != CHECKPOINT_FORMAT or data.get("version") != CHECKPOINT_VERSION:
            raise ValidationError("not a version-1 credit-pricer network document")
        layers = []
        for spec in data["layers"]:
            layer = DenseLayer(spec["weights"], spec["biases"], spec["activation"], spec["dropout_rate"])
            if (layer.in_dim, layer.out_dim) != (spec["in"], spec["out"]):
                raise ValidationError("layer dims disagree with stored weights")
            layers.append(layer)
        return cls(layers)


@dataclass
class AdamState:
    """Adam moments and hyper-parameters for one parameter list."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_parameters(cls, params: Sequence[np.ndarray], learning_rate: float, **kwargs) -> "AdamState":
        if learning_rate <= 0:
            raise ValidationError("learning_rate must be > 0")
        return cls(
            learning_rate=learning_rate,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **kwargs,
        )

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "weight_decay": self.weight_decay,
            "step": self.step,
            "m": [a.tolist() for a in self.m],
            "v": [a.tolist() for a in self.v],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AdamState":
        data = dict(data)
        data["m"] = [np.array(a, dtype=float) for a in data["m"]]
        data["v"] = [np.array(a, dtype=float) for a in data["v"]]
        return cls(**data)


def adam_step(net, grads: Sequence[np.ndarray], state: AdamState) -> None:
    """Apply one bias-corrected Adam update with decoupled weight decay, in place.

    ``net`` is a :class:`Network` or a list of parameter arrays.
    """
    params = net.parameters() if isinstance(net, Network) else list(net)
    if len(grads) != len(params) or len(state.m) != len(params):
        raise ValidationError("gradients / optimizer state do not match the parameters")
    for g, p in zip(grads, params):
        if g.shape != p.shape:
            raise ValidationError("gradient shape does not match parameter shape")
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite gradient passed to adam_step")

    state.step += 1
    lr, b1, b2 = state.learning_rate, state.beta1, state.beta2
    corr1 = 1.0 - b1**state.step
    corr2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if state.weight_decay:
            p *= 1.0 - lr * state.weight_decay
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / corr1) / (np.sqrt(v / corr2) + state.epsilon)
        if not np.all(np.isfinite(p)):
            raise NumericalError("parameter became non-finite after an Adam update")


def save_network(path, net: Network, optimizer: AdamState | None = None) -> None:
    doc = net.to_dict()
    doc["optimizer"] = optimizer.to_dict() if optimizer is not None else None
    Path(path).write_text(json.dumps(doc))


def load_network(path) -> tuple[Network, AdamState | None]:
    doc = json.loads(Path(path).read_text())
    opt = doc.get("optimizer")
    return Network.from_dict(doc), (AdamState.from_dict(opt) if opt else None)


class MinMaxScaler(TransformerMixin, BaseEstimator):
    """Per-column affine map of ``[min, max]`` onto ``feature_range``.

    A constant column maps to the midpoint of the range and inverts back to
    the constant.  One-dimensional input is treated as a single column.
    """

    def __init__(self, feature_range=(0.0, 1.0)):
        self.feature_range = feature_range

    def fit(self, X, y=None):
        X = check_finite(X, "scaler input")
        if X.size == 0:
            raise ValidationError("cannot fit a scaler on empty data")
        lo, hi = self.feature_range
        if not hi > lo:
            raise ValidationError("feature_range must be increasing")
        X2 = X.reshape(-1, 1) if X.ndim == 1 else X
        self.data_min_ = X2.min(axis=0)
        self.data_max_ = X2.max(axis=0)
        self.n_features_in_ = X2.shape[1]
        return self

    def _span(self):
        span = self.data_max_ - self.data_min_
        return span, span > 0

    def transform(self, X):
        check_is_fitted(self, "data_min_")
        X = np.asarray(X, dtype=float)
        X2 = X.reshape(-1, 1) if X.ndim == 1 else X
        lo, hi = self.feature_range
        span, varying = self._span()
        unit = np.where(varying, (X2 - self.data_min_) / np.where(varying, span, 1.0), 0.5)
        out = lo + unit * (hi - lo)
        return out.reshape(X.shape)

    def inverse_transform(self, X):
        check_is_fitted(self, "data_min_")
        X = np.asarray(X, dtype=float)
        X2 = X.reshape(-1, 1) if X.ndim == 1 else X
        lo, hi = self.feature_range
        span, _ = self._span()
        out = self.data_min_ + (X2 - lo) / (hi - lo) * span
        return out.reshape(X.shape)

    def to_dict(self) -> dict:
        check_is_fitted(self, "data_min_")
        return {
            "feature_range": list(self.feature_range),
            "data_min": self.data_min_.tolist(),
            "data_max": self.data_max_.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MinMaxScaler":
        scaler = cls(tuple(data["feature_range"]))
        scaler.data_min_ = np.array(data["data_min"], dtype=float)
        scaler.data_max_ = np.array(data["data_max"], dtype=float)
        scaler.n_features_in_ = scaler.data_min_.shape[0]
        return scaler
