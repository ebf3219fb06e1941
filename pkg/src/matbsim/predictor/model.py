"""Future-performance prediction model.

Three stacked LSTM layers feed a rectifier dense layer and a scalar
regression head. Input is the last three workload estimates (overall plus
the five components), each dimension pre-scaled by its theoretical maximum.
Training uses adaptive-moment gradient descent on mean-squared error with
per-unit recurrent dropout; inference is deterministic and dropout-free,
with the consumer-visible prediction clamped to [0,1].
"""
from __future__ import annotations

import numpy as np

from ..config import COMPONENT_RANGES, OVERALL_RANGE, PredictorConfig
from ..errors import ModelError, TrainingError
from ..optim import Adam
from .lstm import LSTMLayer

INPUT_DIM = 6
INPUT_SCALE = np.array(
    [
        OVERALL_RANGE,
        COMPONENT_RANGES["cognitive"],
        COMPONENT_RANGES["physical"],
        COMPONENT_RANGES["visual"],
        COMPONENT_RANGES["auditory"],
        COMPONENT_RANGES["speech"],
    ]
)
SEQ_LEN = 3


class PerformancePredictor:
    def __init__(
        self,
        hidden: int = 256,
        dense: int = 256,
        num_layers: int = 3,
        dropout: float = 0.8,
        seed: int = 0,
    ):
        if not (0.0 <= dropout < 1.0):
            raise ModelError("dropout must be in [0, 1)")
        self.hidden = hidden
        self.dense = dense
        self.dropout = dropout
        rng = np.random.default_rng(seed)
        self.layers = [
            LSTMLayer(INPUT_DIM if i == 0 else hidden, hidden, rng)
            for i in range(num_layers)
        ]
        scale = 1.0 / np.sqrt(hidden)
        self.w_dense = rng.normal(0.0, scale, size=(hidden, dense))
        self.b_dense = np.zeros(dense)
        self.w_out = rng.normal(0.0, 1.0 / np.sqrt(dense), size=(dense, 1))
        self.b_out = np.zeros(1)

    @classmethod
    def from_config(cls, cfg: PredictorConfig, seed: int = 0) -> "PerformancePredictor":
        return cls(
            hidden=cfg.hidden_units,
            dense=cfg.dense_units,
            num_layers=cfg.num_layers,
            dropout=cfg.dropout,
            seed=seed,
        )

    def params(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.extend(layer.params())
        out.extend([self.w_dense, self.b_dense, self.w_out, self.b_out])
        return out

    def _masks(
        self, batch: int, train: bool, rng: np.random.Generator | None
    ) -> list[np.ndarray]:
        if not train or self.dropout == 0.0:
            return [np.ones((batch, self.hidden)) for _ in self.layers]
        if rng is None:
            raise ModelError("train-mode forward needs a random generator for dropout")
        keep = 1.0 - self.dropout
        return [
            (rng.random((batch, self.hidden)) < keep).astype(float) / keep
            for _ in self.layers
        ]

    def forward(
        self,
        x: np.ndarray,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        """x: (B, 3, 6) raw workload rows -> (B,) unclamped predictions."""
        pred, _ = self._forward_full(np.asarray(x, dtype=float), train, rng)
        return pred

    def _forward_full(self, x, train, rng):
        if x.ndim != 3 or x.shape[1] != SEQ_LEN or x.shape[2] != INPUT_DIM:
            raise ModelError(f"expected input shape (B, {SEQ_LEN}, {INPUT_DIM}), got {x.shape}")
        h = x / INPUT_SCALE
        masks = self._masks(x.shape[0], train, rng)
        caches = []
        for layer, mask in zip(self.layers, masks):
            h, cache = layer.forward(h, mask)
            caches.append(cache)
        last = h[:, -1, :]
        z_dense = last @ self.w_dense + self.b_dense
        a_dense = np.maximum(z_dense, 0.0)
        pred = (a_dense @ self.w_out + self.b_out)[:, 0]
        return pred, (caches, last, z_dense, a_dense)

    def predict(self, window: np.ndarray) -> float:
        """Inference on one 3x6 estimate window, clamped to [0,1]."""
        raw = float(self.forward(np.asarray(window, dtype=float)[None, :, :])[0])
        return min(max(raw, 0.0), 1.0)

    def loss_and_grads(
        self,
        x: np.ndarray,
        y: np.ndarray,
        train: bool = True,
        rng: np.random.Generator | None = None,
    ) -> tuple[float, list[np.ndarray]]:
        pred, (caches, last, z_dense, a_dense) = self._forward_full(
            np.asarray(x, dtype=float), train, rng
        )
        y = np.asarray(y, dtype=float)
        n = len(y)
        loss = float(np.mean((pred - y) ** 2))

        d_pred = (2.0 / n) * (pred - y)[:, None]
        d_w_out = a_dense.T @ d_pred
        d_b_out = d_pred.sum(axis=0)
        d_a = (d_pred @ self.w_out.T) * (z_dense > 0.0)
        d_w_dense = last.T @ d_a
        d_b_dense = d_a.sum(axis=0)
        d_last = d_a @ self.w_dense.T

        d_h = np.zeros((x.shape[0], SEQ_LEN, self.hidden))
        d_h[:, -1, :] = d_last
        layer_grads: list[list[np.ndarray]] = []
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            d_h, grads = layer.backward(d_h, cache)
            layer_grads.append(grads)
        grads_out: list[np.ndarray] = []
        for grads in reversed(layer_grads):
            grads_out.extend(grads)
        grads_out.extend([d_w_dense, d_b_dense, d_w_out, d_b_out])
        return loss, grads_out


def train(
    inputs: np.ndarray,
    targets: np.ndarray,
    cfg: PredictorConfig,
    seed: int = 0,
    model: PerformancePredictor | None = None,
) -> tuple[PerformancePredictor, list[float]]:
    """Train a predictor; fully deterministic given the seed.

    inputs: (n, 3, 6) estimate windows; targets: (n,) in [0,1]. Returns the
    trained model and the per-epoch mean loss curve.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if len(inputs) == 0:
        raise TrainingError("empty predictor training set")
    if cfg.learning_rate <= 0:
        raise TrainingError("learning rate must be positive")
    model = model or PerformancePredictor.from_config(cfg, seed=seed)
    opt = Adam(lr=cfg.learning_rate)
    shuffle_rng = np.random.default_rng(seed + 1)
    dropout_rng = np.random.default_rng(seed + 2)
    losses: list[float] = []
    n = len(inputs)
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        total, batches = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = model.loss_and_grads(
                inputs[idx], targets[idx], train=True, rng=dropout_rng
            )
            if not np.isfinite(loss):
                raise TrainingError(f"predictor training diverged (loss={loss})")
            opt.step(model.params(), grads)
            total += loss
            batches += 1
        losses.append(total / batches)
    return model, losses


def gradient_check(
    model: PerformancePredictor,
    x: np.ndarray,
    y: np.ndarray,
    eps: float = 1e-3,
    richardson: bool = True,
    denom_floor: float = 1e-6,
) -> float:
    """Max relative error between analytic and finite-difference gradients.

    Dropout is disabled (inference-mode passes); every parameter element is
    perturbed with a central difference. With `richardson`, differences at
    eps and eps/2 are extrapolated to cancel the quadratic truncation term,
    which lets eps stay large enough that round-off noise is negligible.
    `denom_floor` keeps elements whose true gradient is vanishingly small
    (absolute agreement at the 1e-13 level) from dominating the relative
    metric; a real backpropagation bug shows up at the scale of the gradient
    itself, orders of magnitude above the floor.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _, grads = model.loss_and_grads(x, y, train=False)

    def loss_only() -> float:
        pred = model.forward(x, train=False)
        return float(np.mean((pred - y) ** 2))

    def central(flat_p, k, orig, h) -> float:
        flat_p[k] = orig + h
        up = loss_only()
        flat_p[k] = orig - h
        down = loss_only()
        flat_p[k] = orig
        return (up - down) / (2.0 * h)

    max_err = 0.0
    for param, grad in zip(model.params(), grads):
        flat_p = param.ravel()
        flat_g = grad.ravel()
        for k in range(flat_p.size):
            orig = flat_p[k]
            if richardson:
                d1 = central(flat_p, k, orig, eps)
                d2 = central(flat_p, k, orig, eps / 2.0)
                numeric = (4.0 * d2 - d1) / 3.0
            else:
                numeric = central(flat_p, k, orig, eps)
            denom = max(abs(numeric) + abs(flat_g[k]), denom_floor)
            max_err = max(max_err, abs(numeric - flat_g[k]) / denom)
    return max_err
