"""Dense encoder-decoder regressor mapping input-space samples to their
equilibrium-space positions.

Layers are ``x @ W + b`` with a rectifier after every hidden layer and an
identity output. Training minimises the mean squared error with mini-batch
RMSprop; gradients come from a hand-written backward pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DivergenceError, DomainError, ShapeError

PAPER_SCHEDULE = ((20, 1e-4), (10, 1e-5))


@dataclass(frozen=True)
class TransformModel:
    layer_sizes: tuple
    weights: tuple
    biases: tuple
    seed: int = 0
    epochs_completed: int = 0
    loss_history: tuple = ()

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ShapeError("need at least input and output sizes")
        if sizes[0] != sizes[-1]:
            raise ShapeError(f"input width {sizes[0]} != output width {sizes[-1]}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ShapeError("one weight matrix and bias per layer required")
        for layer, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (sizes[layer], sizes[layer + 1]) or b.shape != (sizes[layer + 1],):
                raise ShapeError(
                    f"layer {layer}: W {W.shape}, b {b.shape} do not chain "
                    f"{sizes[layer]} -> {sizes[layer + 1]}"
                )
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_parameters(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    # consecutive (n_epochs, learning_rate) segments
    schedule: tuple = PAPER_SCHEDULE
    rho: float = 0.9
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise DomainError("epochs must be >= 0 and batch_size >= 1")
        if sum(n for n, _ in self.schedule) < self.epochs:
            raise DomainError("learning-rate schedule does not cover every epoch")
        if any(rate <= 0 or n < 0 for n, rate in self.schedule):
            raise DomainError("schedule rates must be positive")
        if not 0 < self.rho < 1:
            raise DomainError("rho must lie in (0, 1)")

    @classmethod
    def constant(cls, rate: float, epochs: int, **kwargs) -> "TrainConfig":
        return cls(epochs=epochs, schedule=((epochs, rate),), **kwargs)

    def rate_at(self, epoch: int) -> float:
        end = 0
        for n, rate in self.schedule:
            end += n
            if epoch < end:
                return rate
        raise DomainError(f"epoch {epoch} is past the end of the schedule")


def init_model(d: int, hidden=(), seed: int = 0) -> TransformModel:
    """Glorot-uniform weights, zero biases."""
    hidden = tuple(hidden)
    if d < 1 or any(h < 1 for h in hidden):
        raise DomainError(f"layer widths must be positive (d={d}, hidden={hidden})")
    sizes = (d,) + hidden + (d,)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return TransformModel(sizes, tuple(weights), tuple(biases), seed=seed)


DEFAULT_HIDDEN = (1024, 1024, 1024)


def default_hidden(d: int) -> tuple:
    """Hidden widths used when none are given.

    Three 1024-wide layers regardless of ``d``. On 8x8 digits with 2,000
    training samples the narrower ``(4d, d, 4d)`` net underfits: about 0.84
    accuracy before correction, and ERC loses more than ten points on top.
    The wide net reaches about 0.93 with ERC within 0.015 of it.
    """
    return DEFAULT_HIDDEN


def _forward_cache(model: TransformModel, X: np.ndarray) -> list:
    activations = [X]
    last = len(model.weights) - 1
    for layer, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = activations[-1] @ W + b
        activations.append(z if layer == last else np.maximum(z, 0.0))
    return activations


def forward(model: TransformModel, x) -> np.ndarray:
    """Apply the network to one vector ``(d,)`` or a batch ``(N, d)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.dim or x.ndim not in (1, 2):
        raise ShapeError(f"expected (..., {model.dim}) input, got {x.shape}")
    return _forward_cache(model, np.atleast_2d(x))[-1].reshape(x.shape)


def mse(model: TransformModel, inputs, targets) -> float:
    diff = forward(model, inputs) - targets
    return float(np.mean(diff * diff)) if diff.size else 0.0


def mse_and_gradients(model: TransformModel, inputs, targets) -> tuple:
    """Loss ``mean((phi(x) - y)**2)`` and its gradients ``(dW list, db list)``."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    acts = _forward_cache(model, inputs)
    diff = acts[-1] - targets
    loss = float(np.mean(diff * diff))
    delta = 2.0 * diff / diff.size
    grad_W = [None] * len(model.weights)
    grad_b = [None] * len(model.weights)
    for layer in range(len(model.weights) - 1, -1, -1):
        grad_W[layer] = acts[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ model.weights[layer].T) * (acts[layer] > 0)
    return loss, grad_W, grad_b


def train(model: TransformModel, inputs, targets, config: TrainConfig | None = None) -> TransformModel:
    """Mini-batch RMSprop on the MSE; returns a new model with its loss history.

    Every epoch visits a fresh seeded permutation of the rows; the final short
    batch is kept. The recorded loss is the full-data MSE after the epoch.
    """
    config = config or TrainConfig()
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if inputs.shape != targets.shape or inputs.ndim != 2 or inputs.shape[1] != model.dim:
        raise ShapeError(f"inputs {inputs.shape} and targets {targets.shape} must both be (N, {model.dim})")
    n = inputs.shape[0]
    rng = np.random.default_rng(config.seed)
    weights = [W.copy() for W in model.weights]
    biases = [b.copy() for b in model.biases]
    acc_W = [np.zeros_like(W) for W in weights]
    acc_b = [np.zeros_like(b) for b in biases]
    history = list(model.loss_history)
    work = replace(model, weights=tuple(weights), biases=tuple(biases))
    rho, eps = config.rho, config.eps

    def step(params, grads, accs, lr):
        for p, g, a in zip(params, grads, accs):
            a *= rho
            a += (1.0 - rho) * g * g
            p -= lr * g / (np.sqrt(a) + eps)

    for epoch in range(config.epochs):
        lr = config.rate_at(epoch)
        order = rng.permutation(n)
        # overflow shows up as a non-finite loss, reported below
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, n, config.batch_size):
                batch = order[start:start + config.batch_size]
                _, gW, gb = mse_and_gradients(work, inputs[batch], targets[batch])
                step(weights, gW, acc_W, lr)
                step(biases, gb, acc_b, lr)
            loss = mse(work, inputs, targets)
        if not np.isfinite(loss):
            raise DivergenceError(epoch, loss)
        history.append(loss)

    return replace(
        model,
        weights=tuple(weights),
        biases=tuple(biases),
        epochs_completed=model.epochs_completed + config.epochs,
        loss_history=tuple(history),
    )
