"""Long short-term memory layer with explicit forward/backward passes.

Gate layout inside the fused weight matrices is [input, forget, cell, output]
along the last axis. Recurrent-unit dropout follows the variational scheme:
one mask per layer per forward pass, applied to the hidden state both as the
layer output and in the recurrence, with inverted scaling at train time so
inference needs no rescaling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class LSTMCache:
    x: np.ndarray
    masks: np.ndarray                 # (B, H) dropout mask (already 1/keep scaled)
    gates: list[tuple[np.ndarray, ...]] = field(default_factory=list)
    h_drop: list[np.ndarray] = field(default_factory=list)   # per timestep
    c: list[np.ndarray] = field(default_factory=list)


class LSTMLayer:
    def __init__(self, input_dim: int, hidden: int, rng: np.random.Generator):
        self.input_dim = input_dim
        self.hidden = hidden
        scale = 1.0 / np.sqrt(max(input_dim, hidden))
        self.wx = rng.normal(0.0, scale, size=(input_dim, 4 * hidden))
        self.wh = rng.normal(0.0, scale, size=(hidden, 4 * hidden))
        self.b = np.zeros(4 * hidden)

    def params(self) -> list[np.ndarray]:
        return [self.wx, self.wh, self.b]

    def forward(self, x: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, LSTMCache]:
        """x: (B, T, D); mask: (B, H). Returns dropped hidden sequence (B, T, H)."""
        batch, steps, _ = x.shape
        h = np.zeros((batch, self.hidden))
        c = np.zeros((batch, self.hidden))
        cache = LSTMCache(x=x, masks=mask)
        out = np.empty((batch, steps, self.hidden))
        hsz = self.hidden
        for t in range(steps):
            z = x[:, t, :] @ self.wx + h @ self.wh + self.b
            i = sigmoid(z[:, :hsz])
            f = sigmoid(z[:, hsz : 2 * hsz])
            g = np.tanh(z[:, 2 * hsz : 3 * hsz])
            o = sigmoid(z[:, 3 * hsz :])
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = (o * tc) * mask
            cache.gates.append((i, f, g, o, c_prev, tc))
            cache.c.append(c)
            cache.h_drop.append(h)
            out[:, t, :] = h
        return out, cache

    def backward(
        self, d_out: np.ndarray, cache: LSTMCache
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        """d_out: (B, T, H) gradient on the dropped hidden sequence.

        Returns (gradient w.r.t. x, [dWx, dWh, db])."""
        batch, steps, _ = cache.x.shape
        hsz = self.hidden
        d_wx = np.zeros_like(self.wx)
        d_wh = np.zeros_like(self.wh)
        d_b = np.zeros_like(self.b)
        d_x = np.empty_like(cache.x)
        dh_rec = np.zeros((batch, hsz))
        dc = np.zeros((batch, hsz))
        mask = cache.masks
        for t in range(steps - 1, -1, -1):
            i, f, g, o, c_prev, tc = cache.gates[t]
            dh_drop = d_out[:, t, :] + dh_rec
            dh = dh_drop * mask
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            di = dc * g
            dg = dc * i
            df = dc * c_prev
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            h_prev = cache.h_drop[t - 1] if t > 0 else np.zeros((batch, hsz))
            d_wx += cache.x[:, t, :].T @ dz
            d_wh += h_prev.T @ dz
            d_b += dz.sum(axis=0)
            d_x[:, t, :] = dz @ self.wx.T
            dh_rec = dz @ self.wh.T
            dc = dc * f
        return d_x, [d_wx, d_wh, d_b]
