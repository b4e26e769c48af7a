"""Dense neural-network core: forward/backward, losses, Adam, training loop.

Everything is float64 numpy. Layers are fully connected with ReLU or linear
activation and optional inverted dropout (rescaled at train time so eval
needs no correction).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ShapeError, StateError

ACTIVATIONS = ("relu", "linear")


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    biases: np.ndarray  # (out,)
    activation: str = "linear"
    dropout_p: float = 0.0


@dataclass
class Network:
    layers: list[DenseLayer]

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[1]


@dataclass
class AdamState:
    m: list  # first-moment accumulators, shapes mirror (weights, biases) per layer
    v: list
    t: int = 0
    lr: float = 0.0005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 4
    seed: int = 0
    shuffle: bool = True


@dataclass
class TrainResult:
    losses: list[float]
    accuracies: list[float] | None = None


def init_layer(n_in: int, n_out: int, activation: str, dropout_p: float,
               rng: np.random.Generator) -> DenseLayer:
    """Uniform He-style init: +-sqrt(6/fan_in) for ReLU, Glorot bound for linear."""
    if activation not in ACTIVATIONS:
        raise ArgumentError(f"unknown activation {activation!r}")
    if activation == "relu":
        bound = np.sqrt(6.0 / n_in)
    else:
        bound = np.sqrt(6.0 / (n_in + n_out))
    weights = rng.uniform(-bound, bound, (n_out, n_in))
    return DenseLayer(weights=weights, biases=np.zeros(n_out), activation=activation,
                      dropout_p=dropout_p)


def forward(net: Network, x: np.ndarray, mode: str = "eval",
            rng: np.random.Generator | None = None):
    """Run the network; returns (output, cache) with cache feeding backward().

    ``x`` may be a single vector or a (batch, dim) matrix.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.shape[1] != net.input_dim:
        raise ShapeError(f"input dim {a.shape[1]} != network input {net.input_dim}")
    cache = []
    for layer in net.layers:
        z = a @ layer.weights.T + layer.biases
        out = np.maximum(z, 0.0) if layer.activation == "relu" else z
        mask = None
        if mode == "train" and layer.dropout_p > 0.0:
            if rng is None:
                raise ArgumentError("train-mode forward with dropout needs an rng")
            mask = (rng.random(out.shape) >= layer.dropout_p) / (1.0 - layer.dropout_p)
            out = out * mask
        cache.append((a, z, mask))
        a = out
    return (a[0] if single else a), cache


def backward(net: Network, cache, grad_out: np.ndarray):
    """Reverse-mode gradients for all weights and biases.

    Returns a list of (dW, db) aligned with net.layers.
    """
    if len(cache) != len(net.layers):
        raise StateError("cache does not match the network that produced it")
    grad = np.asarray(grad_out, dtype=np.float64)
    if grad.ndim == 1:
        grad = grad[None, :]
    grads: list = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        a_in, z, mask = cache[i]
        if grad.shape != z.shape:
            raise StateError(f"gradient shape {grad.shape} does not match cache {z.shape}")
        if mask is not None:
            grad = grad * mask
        if layer.activation == "relu":
            grad = grad * (z > 0.0)
        grads[i] = (grad.T @ a_in, grad.sum(axis=0))
        if i > 0:
            grad = grad @ layer.weights
    return grads


def mse_loss(x: np.ndarray, x_hat: np.ndarray):
    """Mean squared error and its gradient w.r.t. the reconstruction."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ShapeError(f"shape mismatch {x.shape} vs {x_hat.shape}")
    diff = x_hat - x
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_ce_loss(logits: np.ndarray, label: int):
    """Cross-entropy of softmax(logits) against one class index, plus gradient."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < logits.size:
        raise ArgumentError(f"label {label} out of range for {logits.size} logits")
    p = softmax(logits)
    grad = p.copy()
    grad[label] -= 1.0
    return float(-np.log(p[label])), grad


def init_adam(net: Network, lr: float = 0.0005) -> AdamState:
    m = [(np.zeros_like(l.weights), np.zeros_like(l.biases)) for l in net.layers]
    v = [(np.zeros_like(l.weights), np.zeros_like(l.biases)) for l in net.layers]
    return AdamState(m=m, v=v, lr=lr)


def adam_step(net: Network, grads, state: AdamState) -> None:
    """One Adam update with bias correction, in place."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for layer, (dw, db), m_pair, v_pair in zip(net.layers, grads, state.m, state.v):
        for param, grad, m, v in ((layer.weights, dw, m_pair[0], v_pair[0]),
                                  (layer.biases, db, m_pair[1], v_pair[1])):
            if param.shape != grad.shape:
                raise ShapeError(f"gradient shape {grad.shape} != parameter {param.shape}")
            m *= b1
            m += (1.0 - b1) * grad
            v *= b2
            v += (1.0 - b2) * grad**2
            param -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


def _batch_loss(net: Network, xs: np.ndarray, ys, loss_kind: str, mode: str,
                rng: np.random.Generator | None):
    out, cache = forward(net, xs, mode=mode, rng=rng)
    n = xs.shape[0]
    if loss_kind == "mse":
        diff = out - ys
        loss = float(np.mean(diff**2))
        grad = 2.0 * diff / diff.size
    elif loss_kind == "ce":
        p = softmax(out)
        idx = np.arange(n)
        loss = float(-np.mean(np.log(p[idx, ys])))
        grad = p
        grad[idx, ys] -= 1.0
        grad /= n
    else:
        raise ArgumentError(f"unknown loss kind {loss_kind!r}")
    return loss, grad, cache, out


def train(net: Network, dataset, loss_kind: str, cfg: TrainConfig,
          rng: np.random.Generator) -> TrainResult:
    """Mini-batch Adam training; deterministic given the rng.

    ``dataset`` is a list of (input vector, target) pairs; targets are
    vectors for "mse" and integer class indices for "ce". Records the
    per-epoch mean loss (and accuracy for "ce").
    """
    if not dataset:
        raise ArgumentError("empty training dataset")
    xs_all = np.stack([np.asarray(x, dtype=np.float64) for x, _ in dataset])
    if loss_kind == "ce":
        ys_all = np.array([int(y) for _, y in dataset])
    else:
        ys_all = np.stack([np.asarray(y, dtype=np.float64) for _, y in dataset])

    state = init_adam(net)
    n = len(dataset)
    losses: list[float] = []
    accuracies: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            sel = order[start : start + cfg.batch_size]
            loss, grad, cache, _ = _batch_loss(
                net, xs_all[sel], ys_all[sel], loss_kind, "train", rng
            )
            adam_step(net, backward(net, cache, grad), state)
            epoch_loss += loss * sel.size
        losses.append(epoch_loss / n)
        if loss_kind == "ce":
            out, _ = forward(net, xs_all, mode="eval")
            accuracies.append(float(np.mean(out.argmax(axis=1) == ys_all)))
    return TrainResult(losses=losses, accuracies=accuracies if loss_kind == "ce" else None)
