"""Small fully connected regressors: one per workload component.

Plain numpy forward/backward with rectifier hidden layers and a linear
output; outputs are clamped to the component's theoretical range at the
estimator boundary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import COMPONENT_RANGES
from ..errors import ModelError, TrainingError
from ..optim import Adam


class FeedForwardNet:
    def __init__(self, layer_sizes: tuple[int, ...], seed: int = 0):
        if len(layer_sizes) < 2:
            raise ModelError("need at least input and output layer sizes")
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        rng = np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    def params(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        """x: (batch, input_dim) -> (batch,) regression output."""
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                h = np.maximum(h, 0.0)
        return h[:, 0]

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray) -> tuple[float, list[np.ndarray]]:
        """Mean-squared-error loss and gradients for every parameter."""
        activations = [x]
        pre: list[np.ndarray] = []
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            h = np.maximum(z, 0.0) if i != last else z
            activations.append(h)

        pred = activations[-1][:, 0]
        n = len(y)
        loss = float(np.mean((pred - y) ** 2))
        delta = (2.0 / n) * (pred - y)[:, None]

        grads: list[np.ndarray] = [np.empty(0)] * (2 * len(self.weights))
        for i in range(len(self.weights) - 1, -1, -1):
            grads[2 * i] = activations[i].T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (pre[i - 1] > 0.0)
        return loss, grads


@dataclass
class ComponentEstimator:
    """Feature-vector -> workload-component regressor with range clamping.

    The network regresses the range-normalized component (labels divided by
    the theoretical maximum during training); the estimate is scaled back and
    clamped to the component's range.
    """

    component: str
    net: FeedForwardNet
    x_mean: np.ndarray | None = None
    x_scale: np.ndarray | None = None

    @property
    def out_range(self) -> tuple[float, float]:
        return (0.0, COMPONENT_RANGES[self.component])

    def estimate(self, features: np.ndarray) -> float:
        features = np.asarray(features, dtype=float)
        if features.shape != (self.net.input_dim,):
            raise ModelError(
                f"{self.component} estimator expects {self.net.input_dim} features,"
                f" got shape {features.shape}"
            )
        if self.x_mean is not None:
            features = (features - self.x_mean) / self.x_scale
        lo, hi = self.out_range
        raw = float(self.net.forward(features[None, :])[0]) * hi
        return min(max(raw, lo), hi)


def estimate_component(features: np.ndarray, model: ComponentEstimator) -> float:
    return model.estimate(features)


def train_component_estimator(
    dataset: tuple[np.ndarray, np.ndarray],
    component: str,
    hidden_layers: tuple[int, ...] = (32, 32),
    learning_rate: float = 1e-3,
    epochs: int = 400,
    batch_size: int = 64,
    seed: int = 0,
) -> tuple[ComponentEstimator, list[float]]:
    """Train one component estimator; deterministic given the seed.

    dataset: (features (n, d), labels (n,)) with labels inside the
    component's theoretical range.
    """
    x, y = dataset
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) == 0:
        raise TrainingError("empty training set")
    lo, hi = 0.0, COMPONENT_RANGES[component]
    if y.min() < lo - 1e-9 or y.max() > hi + 1e-9:
        raise TrainingError(
            f"labels outside {component} range [{lo}, {hi}]: "
            f"[{y.min():.3f}, {y.max():.3f}]"
        )

    x_mean = x.mean(axis=0)
    x_scale = np.maximum(x.std(axis=0), 1e-8)
    xn = (x - x_mean) / x_scale
    yn = y / hi

    net = FeedForwardNet((x.shape[1], *hidden_layers, 1), seed=seed)
    opt = Adam(lr=learning_rate)
    rng = np.random.default_rng(seed + 1)
    losses: list[float] = []
    n = len(x)
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            loss, grads = net.loss_and_grads(xn[idx], yn[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"{component} training diverged (loss={loss})")
            opt.step(net.params(), grads)
            epoch_loss += loss
            batches += 1
        losses.append(epoch_loss / batches)
    return ComponentEstimator(component, net, x_mean, x_scale), losses
