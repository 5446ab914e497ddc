"""A small fully connected regressor: ReLU hidden layers, identity output,
trained with Adam on mean squared error. Written against plain numpy so the
gradients can be verified against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import Normalizer

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

SNAPSHOT_FORMAT = 1


@dataclass
class MlpModel:
    """Parameters of the network; ``layer_sizes`` includes input and output."""

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    seed: int
    loss_curve: list[float] = field(default_factory=list)

    @classmethod
    def initialize(cls, layer_sizes, seed: int) -> "MlpModel":
        """Uniform init in +-sqrt(6 / (fan_in + fan_out)), weights then bias
        per layer, all drawn from one generator seeded with ``seed``."""
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError("layer_sizes needs >= 2 positive entries")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(layer_sizes=sizes, weights=weights, biases=biases, seed=seed)

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Batch forward pass; accepts (m, d) or a single length-d vector."""
        x = np.asarray(inputs, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        out = _activations(self, x)[-1]
        return out[0] if single else out


def _activations(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    acts = [x]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w + b
        acts.append(z if i == last else np.maximum(z, 0.0))
    return acts


def loss_and_gradients(model: MlpModel, features: np.ndarray,
                       targets: np.ndarray):
    """MSE over all output elements and its gradients w.r.t. every parameter.

    Returns (loss, weight_grads, bias_grads) with grads ordered like the
    model's parameter lists.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    acts = _activations(model, x)
    resid = acts[-1] - y
    loss = float((resid * resid).mean())
    delta = (2.0 / resid.size) * resid
    n_layers = len(model.weights)
    w_grads: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    b_grads: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    for i in reversed(range(n_layers)):
        w_grads[i] = acts[i].T @ delta
        b_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (acts[i] > 0)
    return loss, w_grads, b_grads


def mlp_train(features: np.ndarray, targets: np.ndarray,
              hidden: tuple[int, ...] = (20, 20), epochs: int = 200,
              learning_rate: float = 1e-3, batch_size: int = 0,
              seed: int = 10) -> MlpModel:
    """Train a fresh network on (already standardized) features.

    ``batch_size = 0`` means full batch. The per-epoch training loss (before
    that epoch's update) is recorded on ``model.loss_curve``; a non-finite
    loss aborts with the epoch in the message.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("features and targets must be 2-d")
    if x.shape[0] != y.shape[0] or x.shape[0] < 1:
        raise ValueError("features and targets need matching row counts >= 1")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")

    model = MlpModel.initialize((x.shape[1], *hidden, y.shape[1]), seed)
    params = model.weights + model.biases
    first_moment = [np.zeros_like(p) for p in params]
    second_moment = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(seed)
    steps = 0

    rows = x.shape[0]
    size = rows if batch_size in (0, None) else min(batch_size, rows)
    for epoch in range(epochs):
        if size == rows:
            batches = [(x, y)]
        else:
            perm = rng.permutation(rows)
            batches = [(x[perm[i: i + size]], y[perm[i: i + size]])
                       for i in range(0, rows, size)]
        epoch_losses = []
        for bx, by in batches:
            loss, w_grads, b_grads = loss_and_gradients(model, bx, by)
            epoch_losses.append(loss)
            if not math.isfinite(loss):
                raise RuntimeError(
                    f"training diverged at epoch {epoch}: loss={loss}"
                )
            steps += 1
            grads = w_grads + b_grads
            bias1 = 1.0 - ADAM_BETA1 ** steps
            bias2 = 1.0 - ADAM_BETA2 ** steps
            for p, g, m, v in zip(params, grads, first_moment, second_moment):
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * g
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * g * g
                p -= learning_rate * (m / bias1) / (np.sqrt(v / bias2) + ADAM_EPS)
        model.loss_curve.append(float(np.mean(epoch_losses)))
    return model


def mlp_predict(model: MlpModel, feature_vec: np.ndarray,
                normalizer: Normalizer) -> np.ndarray:
    """Score vector for one raw feature vector (standardized internally)."""
    return model.forward(normalizer.transform(feature_vec))


def save_model(model: MlpModel, path: str | Path) -> None:
    """Snapshot layer sizes, seed, and parameters; round-trips bit-exact."""
    arrays = {
        "format_version": np.int64(SNAPSHOT_FORMAT),
        "layer_sizes": np.asarray(model.layer_sizes, dtype=np.int64),
        "seed": np.int64(model.seed),
    }
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"weight_{i}"] = w
        arrays[f"bias_{i}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path: str | Path) -> MlpModel:
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != SNAPSHOT_FORMAT:
            raise ValueError(f"unsupported model snapshot version {version}")
        sizes = tuple(int(s) for s in data["layer_sizes"])
        weights = [data[f"weight_{i}"].copy() for i in range(len(sizes) - 1)]
        biases = [data[f"bias_{i}"].copy() for i in range(len(sizes) - 1)]
        return MlpModel(layer_sizes=sizes, weights=weights, biases=biases,
                        seed=int(data["seed"]))
