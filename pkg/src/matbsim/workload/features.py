"""Statistical feature extraction over 30-s physiological epochs.

Four statistics per channel: mean, population variance, average gradient
(mean of successive differences divided by the sample period), and the
ordinary-least-squares slope of the signal against time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..config import PHYSIO_CHANNELS
from ..errors import InsufficientDataError

STAT_NAMES = ("mean", "variance", "avg_gradient", "slope")

FEATURE_DIM = len(PHYSIO_CHANNELS) * len(STAT_NAMES)


@dataclass(frozen=True)
class PhysioSample:
    t: float
    heart_rate: float
    hr_variability: float
    respiration_rate: float
    posture_magnitude: float
    noise_level: float
    speech_rate: float
    speech_intensity: float
    pitch: float

    def channels(self) -> tuple[float, ...]:
        return (
            self.heart_rate,
            self.hr_variability,
            self.respiration_rate,
            self.posture_magnitude,
            self.noise_level,
            self.speech_rate,
            self.speech_intensity,
            self.pitch,
        )

    def to_payload(self) -> dict:
        return {name: value for name, value in zip(PHYSIO_CHANNELS, self.channels())}

    @classmethod
    def from_payload(cls, t: float, data: dict) -> "PhysioSample":
        return cls(t, *(data[name] for name in PHYSIO_CHANNELS))


def channel_statistics(times: np.ndarray, values: np.ndarray) -> tuple[float, float, float, float]:
    """(mean, population variance, average gradient, OLS slope) of one signal."""
    n = len(values)
    if n < 2:
        raise InsufficientDataError("need at least 2 samples for channel statistics")
    mean = float(np.mean(values))
    variance = float(np.mean((values - mean) ** 2))
    period = (times[-1] - times[0]) / (n - 1)
    avg_gradient = float(np.mean(np.diff(values)) / period)
    t_centered = times - times.mean()
    denom = float(np.dot(t_centered, t_centered))
    slope = float(np.dot(t_centered, values - mean) / denom) if denom > 0 else 0.0
    return mean, variance, avg_gradient, slope


def extract_features(
    window: Sequence[PhysioSample], epoch_s: float = 30.0
) -> np.ndarray:
    """Flat feature vector (channels x statistics) over one epoch.

    The window must span the epoch length to within one sample period and
    contain at least two samples.
    """
    if len(window) < 2:
        raise InsufficientDataError(
            f"epoch needs >= 2 samples, got {len(window)}"
        )
    times = np.array([s.t for s in window], dtype=float)
    span = times[-1] - times[0]
    period = span / (len(window) - 1)
    if abs(span - epoch_s) > period + 1e-9:
        raise InsufficientDataError(
            f"window spans {span:.3f}s, expected {epoch_s:.0f}s within one sample period"
        )
    matrix = np.array([s.channels() for s in window], dtype=float)
    out = np.empty(FEATURE_DIM, dtype=float)
    for c in range(matrix.shape[1]):
        out[c * 4 : c * 4 + 4] = channel_statistics(times, matrix[:, c])
    return out
