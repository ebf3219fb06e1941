"""Training-set construction for the performance predictor.

Each sample pairs the three most recent workload estimates (at t-10, t-5, t)
with overall task performance one minute ahead, smoothed over a 30-s window
centered on the horizon: the performance sample whose trailing window ends at
t + horizon + window/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scoring import PerformanceSample
from ..workload.pipeline import WorkloadEstimate


@dataclass(frozen=True)
class TrainingSample:
    t: float                        # timestamp of the newest estimate
    inputs: np.ndarray              # (3, 6), oldest first
    target: float                   # overall performance in [0,1]


def build_training_set(
    estimates: list[WorkloadEstimate],
    performance: list[PerformanceSample],
    trial_end: float,
    horizon_s: float = 60.0,
    cadence_s: float = 5.0,
    perf_window_s: float = 30.0,
) -> list[TrainingSample]:
    """All (input window, future performance) pairs available in one log."""
    est_by_t = {round(e.t, 6): e for e in estimates}
    perf_by_t = {round(p.timestamp, 6): p for p in performance}
    samples: list[TrainingSample] = []
    for est in estimates:
        t = est.t
        target_t = round(t + horizon_s + perf_window_s / 2.0, 6)
        if t + horizon_s + perf_window_s / 2.0 > trial_end + 1e-9:
            continue
        prior = [est_by_t.get(round(t - 2 * cadence_s, 6)), est_by_t.get(round(t - cadence_s, 6))]
        perf = perf_by_t.get(target_t)
        if prior[0] is None or prior[1] is None or perf is None:
            continue
        rows = np.array(
            [prior[0].input_row(), prior[1].input_row(), est.input_row()], dtype=float
        )
        samples.append(TrainingSample(t=t, inputs=rows, target=perf.overall))
    return samples


def to_arrays(samples: list[TrainingSample]) -> tuple[np.ndarray, np.ndarray]:
    if not samples:
        return np.empty((0, 3, 6)), np.empty(0)
    x = np.stack([s.inputs for s in samples])
    y = np.array([s.target for s in samples])
    return x, y
