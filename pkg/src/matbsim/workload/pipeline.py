"""Workload estimation pipeline.

Every 5 s: extract epoch statistics from the buffered physiological
channels, append the contextual features of the active task set, run the
five component estimators, sum into overall workload, and classify the
operator state against two thresholds. No estimate is emitted until a full
epoch of samples exists (cold start).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from ..config import (
    COMPONENT_RANGES,
    OVERALL_RANGE,
    WORKLOAD_COMPONENTS,
    PipelineConfig,
)
from ..errors import PipelineError
from ..tasks import Task
from .context import ContextTable, contextual_features
from .features import FEATURE_DIM, PhysioSample, extract_features
from .mlp import ComponentEstimator

STATE_CLASSES = ("UL", "NL", "OL")

LOAD_LEVELS = ("unloaded", "loaded", "overloaded")


@dataclass(frozen=True)
class WorkloadEstimate:
    t: float
    cognitive: float
    physical: float
    visual: float
    auditory: float
    speech: float
    overall: float
    state: str

    def component(self, name: str) -> float:
        return getattr(self, name)

    def input_row(self) -> tuple[float, ...]:
        """(overall + five components) row for the performance predictor."""
        return (
            self.overall,
            self.cognitive,
            self.physical,
            self.visual,
            self.auditory,
            self.speech,
        )

    def to_payload(self) -> dict:
        return {
            "cognitive": self.cognitive,
            "physical": self.physical,
            "visual": self.visual,
            "auditory": self.auditory,
            "speech": self.speech,
            "overall": self.overall,
            "state": self.state,
        }

    @classmethod
    def from_payload(cls, t: float, data: dict) -> "WorkloadEstimate":
        return cls(t=t, **{k: data[k] for k in (*WORKLOAD_COMPONENTS, "overall", "state")})


def aggregate_overall(components: Mapping[str, float]) -> float:
    """Uniform (unit-weight) aggregation: the sum of the five components."""
    missing = [c for c in WORKLOAD_COMPONENTS if c not in components]
    if missing:
        raise PipelineError(f"missing workload components: {missing}")
    total = sum(components[c] for c in WORKLOAD_COMPONENTS)
    return min(max(total, 0.0), OVERALL_RANGE)


def classify_state(overall: float, theta_low: float, theta_high: float) -> str:
    if theta_low >= theta_high:
        raise PipelineError("theta_low must be < theta_high")
    if overall < theta_low:
        return "UL"
    if overall > theta_high:
        return "OL"
    return "NL"


def calibrate_thresholds(
    estimates_by_label: Mapping[str, list[float]]
) -> tuple[float, float]:
    """State thresholds from previously collected no-adaptation estimates:
    midpoints between the per-condition mean overall estimates (the same rule
    the config defaults instantiate with the published group means)."""
    means = {}
    for label in STATE_CLASSES:
        values = estimates_by_label.get(label)
        if not values:
            raise PipelineError(f"no estimates for condition {label}")
        means[label] = sum(values) / len(values)
    if not (means["UL"] < means["NL"] < means["OL"]):
        raise PipelineError(f"condition means not ordered: {means}")
    return (
        (means["UL"] + means["NL"]) / 2.0,
        (means["NL"] + means["OL"]) / 2.0,
    )


def channel_load_level(
    value: float,
    value_range: float,
    cutoff_loaded: float = 0.3,
    cutoff_overloaded: float = 0.7,
) -> str:
    """unloaded below the loaded cutoff, overloaded at or above the upper
    cutoff (half-open boundaries: a value exactly at a cutoff takes the
    higher class)."""
    if value < cutoff_loaded * value_range:
        return "unloaded"
    if value >= cutoff_overloaded * value_range:
        return "overloaded"
    return "loaded"


def channel_loads(
    estimate: WorkloadEstimate, cutoff_loaded: float, cutoff_overloaded: float
) -> dict[str, str]:
    return {
        name: channel_load_level(
            estimate.component(name), COMPONENT_RANGES[name], cutoff_loaded, cutoff_overloaded
        )
        for name in WORKLOAD_COMPONENTS
    }


class WorkloadPipeline:
    """Single-owner estimator state: rolling physio buffer plus history."""

    def __init__(
        self,
        cfg: PipelineConfig,
        models: Mapping[str, ComponentEstimator] | None = None,
    ):
        self.cfg = cfg
        self.models = dict(models) if models else None
        self.table = ContextTable.from_config(cfg)
        maxlen = int(cfg.epoch_s * cfg.physio_hz) + 4
        self.buffer: deque[PhysioSample] = deque(maxlen=maxlen)
        self.history: list[WorkloadEstimate] = []

    def add_sample(self, sample: PhysioSample) -> None:
        self.buffer.append(sample)

    def epoch_window(self, now: float) -> list[PhysioSample]:
        start = now - self.cfg.epoch_s
        return [s for s in self.buffer if start - 1e-9 <= s.t <= now + 1e-9]

    def features(self, now: float, active: Iterable[Task]) -> np.ndarray:
        stats = extract_features(self.epoch_window(now), self.cfg.epoch_s)
        ctx = contextual_features(active, self.table)
        return np.concatenate([stats, ctx])

    def estimate_tick(self, now: float, active: Iterable[Task]) -> WorkloadEstimate | None:
        """One perceive step; None while the buffer is still cold."""
        window = self.epoch_window(now)
        span = window[-1].t - window[0].t if len(window) >= 2 else 0.0
        if span < self.cfg.epoch_s - 1.0 / self.cfg.physio_hz - 1e-9:
            return None
        if self.models is None:
            raise PipelineError("pipeline has no estimator models")
        vec = self.features(now, active)
        components = {name: self.models[name].estimate(vec) for name in WORKLOAD_COMPONENTS}
        estimate = self._assemble(now, components)
        self.history.append(estimate)
        return estimate

    def record(self, estimate: WorkloadEstimate) -> None:
        """Append an externally produced estimate (ground-truth source)."""
        self.history.append(estimate)

    def _assemble(self, now: float, components: Mapping[str, float]) -> WorkloadEstimate:
        overall = aggregate_overall(components)
        state = classify_state(overall, self.cfg.theta_low, self.cfg.theta_high)
        return WorkloadEstimate(
            t=now,
            cognitive=components["cognitive"],
            physical=components["physical"],
            visual=components["visual"],
            auditory=components["auditory"],
            speech=components["speech"],
            overall=overall,
            state=state,
        )

    def assemble_from_loads(self, now: float, load_means: Mapping[str, float]) -> WorkloadEstimate:
        """Ground-truth estimate pathway: epoch-mean induced loads scaled to
        component ranges, bypassing the neural estimators."""
        components = {
            name: min(max(load_means[name], 0.0), 1.0) * COMPONENT_RANGES[name]
            for name in WORKLOAD_COMPONENTS
        }
        estimate = self._assemble(now, components)
        self.history.append(estimate)
        return estimate

    def latest_loads(self) -> dict[str, str] | None:
        if not self.history:
            return None
        return channel_loads(
            self.history[-1], self.cfg.cutoff_loaded, self.cfg.cutoff_overloaded
        )

    def state_history(self, n: int) -> list[str]:
        return [e.state for e in self.history[-n:]]
