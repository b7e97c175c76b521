"""Feed-forward multilayer perceptron trained by delta-rule backpropagation.

The network predicts the dominant temperament dimension (3-way output) from
a flattened session encoding: 30 questions x 9 features (type one-hot,
signed answer, valence, arousal) = 270 inputs. Training is per-sample
gradient descent on the squared error L = sum((y - t)^2) / 2, whose exact
gradient under sigmoid activations is the classic delta rule:

    output delta   d_o = y (1 - y) (y - t)
    hidden delta   d_h = y_h (1 - y_h) . (W^T d)
    weight update  w  += -eta . d . x

Sigmoid is the default activation; relu is available with the matching
derivative substituted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bank import Dimension, TYPE_ORDER
from .session import AnswerRecord, AnswerValue

INPUT_SIZE = 270
OUTPUT_SIZE = 3
FEATURES_PER_QUESTION = 9

#: Output/label order of the three classes.
LABEL_ORDER = [Dimension.HA, Dimension.RD, Dimension.NS]


try:
    from scipy.special import expit as _expit
except ImportError:  # scipy is optional; the formula below is equivalent
    _expit = None


def sigmoid(z: np.ndarray) -> np.ndarray:
    if _expit is not None:
        return _expit(z)
    return 1.0 / (1.0 + np.exp(-z))


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, z)


_ACTIVATIONS = {"sigmoid": sigmoid, "relu": relu}


@dataclass
class Mlp:
    """Layer sizes plus per-layer weight matrices (out x in) and bias vectors."""

    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "sigmoid"

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise ValueError("one weight matrix required per layer transition")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_sizes[l + 1], self.layer_sizes[l])
            if w.shape != expected:
                raise ValueError(f"weights[{l}] has shape {w.shape}, expected {expected}")
            if b.shape != (self.layer_sizes[l + 1],):
                raise ValueError(f"biases[{l}] has shape {b.shape}")

    @classmethod
    def create(
        cls,
        layer_sizes: Sequence[int],
        activation: str = "sigmoid",
        seed: int = 0,
    ) -> "Mlp":
        """Seeded symmetric-uniform init, half-width sqrt(6 / (fan_in + fan_out))."""
        sizes = list(layer_sizes)
        if len(sizes) < 2 or any(s <= 0 for s in sizes):
            raise ValueError(f"invalid layer sizes {sizes}")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            r = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-r, r, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(layer_sizes=sizes, weights=weights, biases=biases, activation=activation)

    def copy_weights(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]


def default_network(hidden: Sequence[int] = (32, 32), activation: str = "sigmoid",
                    seed: int = 0) -> Mlp:
    return Mlp.create([INPUT_SIZE, *hidden, OUTPUT_SIZE], activation=activation, seed=seed)


def forward(net: Mlp, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Layer-by-layer affine + activation; returns all activations (input first)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.layer_sizes[0],):
        raise ValueError(f"input has shape {x.shape}, expected ({net.layer_sizes[0]},)")
    act = _ACTIVATIONS[net.activation]
    activations = [x]
    for w, b in zip(net.weights, net.biases):
        activations.append(act(w @ activations[-1] + b))
    return activations, activations[-1]


def forward_batch(net: Mlp, xs: np.ndarray) -> np.ndarray:
    """Vectorized forward over rows of ``xs``; used for evaluation."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != net.layer_sizes[0]:
        raise ValueError(f"batch has shape {xs.shape}, expected (N, {net.layer_sizes[0]})")
    act = _ACTIVATIONS[net.activation]
    a = xs
    for w, b in zip(net.weights, net.biases):
        a = act(a @ w.T + b)
    return a


def output_delta(y0: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Sigmoid output delta: y (1 - y) (y - t), elementwise."""
    y0 = np.asarray(y0, dtype=float)
    t = np.asarray(t, dtype=float)
    return y0 * (1.0 - y0) * (y0 - t)


def hidden_delta(
    y_h: np.ndarray, downstream_deltas: np.ndarray, downstream_weights: np.ndarray
) -> np.ndarray:
    """Sigmoid hidden delta: y (1 - y) times the back-propagated weighted sum."""
    y_h = np.asarray(y_h, dtype=float)
    downstream_deltas = np.asarray(downstream_deltas, dtype=float)
    if downstream_weights.shape[0] != downstream_deltas.shape[0]:
        raise ValueError(
            f"deltas {downstream_deltas.shape} do not match weights {downstream_weights.shape}"
        )
    return y_h * (1.0 - y_h) * (downstream_weights.T @ downstream_deltas)


def _activation_gate(net: Mlp, y: np.ndarray) -> np.ndarray:
    if net.activation == "sigmoid":
        return y * (1.0 - y)
    return (y > 0).astype(float)  # relu derivative in terms of the activation


def backward(net: Mlp, activations: list[np.ndarray], target: np.ndarray) -> list[np.ndarray]:
    """Per-layer deltas for the squared-error loss L = sum((y - t)^2) / 2."""
    target = np.asarray(target, dtype=float)
    deltas: list[np.ndarray] = [np.empty(0)] * len(net.weights)
    y_out = activations[-1]
    deltas[-1] = _activation_gate(net, y_out) * (y_out - target)
    for l in range(len(net.weights) - 2, -1, -1):
        y_h = activations[l + 1]
        deltas[l] = _activation_gate(net, y_h) * (net.weights[l + 1].T @ deltas[l + 1])
    return deltas


def update_weights(
    net: Mlp,
    activations: list[np.ndarray],
    deltas: list[np.ndarray],
    learning_rate: float,
) -> None:
    """In-place step w += -eta d x (biases see a constant input of 1)."""
    for l, delta in enumerate(deltas):
        net.weights[l] += -learning_rate * np.outer(delta, activations[l])
        net.biases[l] += -learning_rate * delta


def gradients(net: Mlp, x: np.ndarray, t: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Delta-rule gradients of L = sum((y - t)^2) / 2 for one sample."""
    activations, _ = forward(net, x)
    deltas = backward(net, activations, t)
    dws = [np.outer(delta, activations[l]) for l, delta in enumerate(deltas)]
    dbs = [delta.copy() for delta in deltas]
    return dws, dbs


def train_step(net: Mlp, x: np.ndarray, t: np.ndarray, learning_rate: float) -> float:
    """One stochastic update on a single sample; returns its pre-update loss."""
    activations, y = forward(net, x)
    loss = 0.5 * float(np.sum((y - np.asarray(t, dtype=float)) ** 2))
    deltas = backward(net, activations, t)
    update_weights(net, activations, deltas, learning_rate)
    return loss


def mse(outputs: np.ndarray | Sequence[np.ndarray], targets: np.ndarray | Sequence[np.ndarray]) -> float:
    """Mean over samples of the summed squared component error."""
    outputs = np.atleast_2d(np.asarray(outputs, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if outputs.shape != targets.shape:
        raise ValueError(f"shape mismatch {outputs.shape} vs {targets.shape}")
    if outputs.size == 0:
        raise ValueError("cannot average over an empty set")
    return float(np.mean(np.sum((outputs - targets) ** 2, axis=1)))


def encode_session(records: Sequence[AnswerRecord]) -> np.ndarray:
    """Flatten 30 standard records into the 270-feature input vector.

    Per question: one-hot(6) of the type in canonical order, answer as
    +1 (Yes) / -1 (No), then valence and arousal.
    """
    if len(records) != 30:
        raise ValueError(f"expected exactly 30 standard records, got {len(records)}")
    features = np.zeros(INPUT_SIZE)
    for i, record in enumerate(records):
        base = i * FEATURES_PER_QUESTION
        features[base + TYPE_ORDER.index(record.qtype)] = 1.0
        features[base + 6] = 1.0 if record.answer is AnswerValue.YES else -1.0
        features[base + 7] = record.emotion.valence
        features[base + 8] = record.emotion.arousal
    return features


def one_hot_label(dimension: Dimension) -> np.ndarray:
    vec = np.zeros(OUTPUT_SIZE)
    vec[LABEL_ORDER.index(dimension)] = 1.0
    return vec


@dataclass
class Dataset:
    """Feature matrix (N x 270, values in [-1, 1]) and one-hot labels (N x 3)."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2 or self.features.shape[1] != INPUT_SIZE:
            raise ValueError(f"features must be (N, {INPUT_SIZE}), got {self.features.shape}")
        if self.labels.shape != (self.features.shape[0], OUTPUT_SIZE):
            raise ValueError(f"labels must be (N, {OUTPUT_SIZE}), got {self.labels.shape}")
        if self.features.size and (np.min(self.features) < -1.0 or np.max(self.features) > 1.0):
            raise ValueError("feature values must lie in [-1, 1]")
        row_ok = np.all(np.isin(self.labels, (0.0, 1.0))) and np.all(
            np.sum(self.labels, axis=1) == 1.0
        )
        if self.labels.size and not row_ok:
            raise ValueError("labels must be one-hot rows")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    max_epochs: int = 500
    patience: int = 20
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {self.split}")
        if abs(self.split[2] - 0.15) > 1e-9:
            raise ValueError("test fraction is fixed at 0.15")


@dataclass
class TrainReport:
    train_mse: list[float]
    val_mse: list[float]
    stop_reason: str  # "max_epochs" or "early_stopping"
    best_epoch: int  # 1-based; 0 when no epoch ran
    epochs_run: int
    train_indices: np.ndarray
    val_indices: np.ndarray
    test_indices: np.ndarray
    net: Mlp = field(repr=False)


def split_indices(
    n: int, split: tuple[float, float, float], rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    perm = rng.permutation(n)
    n_train = int(round(split[0] * n))
    n_val = int(round(split[1] * n))
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def train(net: Mlp, data: Dataset, cfg: TrainConfig) -> TrainReport:
    """Per-sample gradient descent with validation-based early stopping.

    Deterministic given the config seed (split and epoch shuffles) and the
    net's initial weights. The returned net carries the weights of the best
    validation epoch.
    """
    rng = np.random.default_rng(cfg.seed)
    tr_idx, va_idx, te_idx = split_indices(len(data), cfg.split, rng)
    if min(len(tr_idx), len(va_idx), len(te_idx)) == 0:
        raise ValueError(
            f"dataset of {len(data)} rows leaves an empty split under {cfg.split}"
        )

    x_train, t_train = data.features[tr_idx], data.labels[tr_idx]
    x_val, t_val = data.features[va_idx], data.labels[va_idx]

    train_curve: list[float] = []
    val_curve: list[float] = []
    best_val = np.inf
    best_epoch = 0
    best_weights = net.copy_weights()
    since_improvement = 0
    stop_reason = "max_epochs"

    weights, biases = net.weights, net.biases
    n_layers = len(weights)
    is_sigmoid = net.activation == "sigmoid"
    act = sigmoid if is_sigmoid else relu
    lr = cfg.learning_rate
    dot = np.dot

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(tr_idx))
        # tight inline of forward/backward/update; semantics match train_step
        for i in order:
            acts = [x_train[i]]
            a = acts[0]
            for w, b in zip(weights, biases):
                a = act(dot(w, a) + b)
                acts.append(a)
            gate = a * (1.0 - a) if is_sigmoid else (a > 0).astype(float)
            delta = gate * (a - t_train[i])
            for l in range(n_layers - 1, -1, -1):
                if l > 0:
                    y = acts[l]
                    back = dot(delta, weights[l])
                    gate = y * (1.0 - y) if is_sigmoid else (y > 0).astype(float)
                    next_delta = gate * back
                scaled = lr * delta
                weights[l] -= scaled[:, None] * acts[l]
                biases[l] -= scaled
                if l > 0:
                    delta = next_delta

        train_curve.append(mse(forward_batch(net, x_train), t_train))
        val_curve.append(mse(forward_batch(net, x_val), t_val))

        if val_curve[-1] < best_val:
            best_val = val_curve[-1]
            best_epoch = epoch
            best_weights = net.copy_weights()
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= cfg.patience:
                stop_reason = "early_stopping"
                break

    net.weights, net.biases = best_weights
    return TrainReport(
        train_mse=train_curve,
        val_mse=val_curve,
        stop_reason=stop_reason,
        best_epoch=best_epoch,
        epochs_run=len(val_curve),
        train_indices=tr_idx,
        val_indices=va_idx,
        test_indices=te_idx,
        net=net,
    )


@dataclass
class Metrics:
    accuracy: float
    precision: dict[Dimension, float]
    macro_f1: float
    confusion: np.ndarray  # rows = true class, columns = predicted


def evaluate(net: Mlp, features: np.ndarray, labels: np.ndarray) -> Metrics:
    """Argmax decoding plus standard accuracy / precision / macro-F1."""
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(features) == 0:
        raise ValueError("cannot evaluate on an empty split")
    predicted = np.argmax(forward_batch(net, features), axis=1)
    true = np.argmax(labels, axis=1)

    confusion = np.zeros((OUTPUT_SIZE, OUTPUT_SIZE), dtype=int)
    for t, p in zip(true, predicted):
        confusion[t, p] += 1
    return metrics_from_confusion(confusion)


def metrics_from_confusion(confusion: np.ndarray) -> Metrics:
    confusion = np.asarray(confusion, dtype=int)
    total = confusion.sum()
    accuracy = float(np.trace(confusion)) / total
    precision: dict[Dimension, float] = {}
    f1s = []
    for k, dim in enumerate(LABEL_ORDER):
        tp = confusion[k, k]
        col = confusion[:, k].sum()
        row = confusion[k, :].sum()
        p = tp / col if col else 0.0
        r = tp / row if row else 0.0
        precision[dim] = float(p)
        f1s.append(2 * p * r / (p + r) if (p + r) else 0.0)
    return Metrics(
        accuracy=accuracy,
        precision=precision,
        macro_f1=float(np.mean(f1s)),
        confusion=confusion,
    )


CHECKPOINT_VERSION = 1


def save_checkpoint(net: Mlp, path: Path | str, seed: int | None = None) -> None:
    """Versioned JSON checkpoint; floats round-trip exactly."""
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "layer_sizes": net.layer_sizes,
        "activation": net.activation,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "seed": seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path: Path | str) -> tuple[Mlp, int | None]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version!r}")
    net = Mlp(
        layer_sizes=list(doc["layer_sizes"]),
        weights=[np.array(w, dtype=float) for w in doc["weights"]],
        biases=[np.array(b, dtype=float) for b in doc["biases"]],
        activation=doc["activation"],
    )
    return net, doc.get("seed")
