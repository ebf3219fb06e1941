"""Per-task performance metrics normalized to [0,1] and their aggregation.

Every task maps onto a unit-interval score: tracking through a linear RMSE
map, system monitoring and communications through reaction time and success
rate, resource management through time-in-range of the primary tanks.
Overall performance is the uniform average over the currently active task
set only.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from math import sqrt
from typing import Iterable, Mapping, Sequence

from .config import ScoringConfig
from .errors import AccountingError, ConfigError
from .tasks import Task


def clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def tracking_score(rmse: float, r_max: float) -> float:
    """Linear map: 0 error -> 1.0, r_max or worse -> 0.0."""
    if r_max <= 0:
        raise ConfigError("r_max must be positive")
    return clamp01(1.0 - rmse / r_max)


def reaction_score(rt: float | None, window: float) -> float:
    """Linear decay of credit with reaction time; expired events score 0."""
    if rt is None:
        return 0.0
    return clamp01(1.0 - rt / window)


def success_rate(resolved: int, total: int) -> float:
    """Fraction of demands corrected; vacuously 1.0 when nothing was demanded."""
    if resolved > total:
        raise AccountingError(f"resolved ({resolved}) exceeds total ({total})")
    if total == 0:
        return 1.0
    return resolved / total


def fuel_score(
    level: float, band: tuple[float, float] = (2000.0, 3000.0)
) -> float:
    """1.0 inside the band, linear decay outside, continuous at both edges."""
    lo, hi = band
    if level < lo:
        return clamp01(level / lo)
    if level > hi:
        return clamp01(1.0 - (level - hi) / lo)
    return 1.0


def overall_performance(
    scores: Mapping[Task, float], active: Iterable[Task]
) -> float:
    """Uniform average of the active tasks' scores."""
    active = list(active)
    if not active:
        raise ValueError("overall performance undefined for an empty active set")
    total = 0.0
    for task in active:
        if task not in scores:
            raise ValueError(f"active task {task} has no score")
        total += scores[task]
    return total / len(active)


@dataclass(frozen=True)
class Closure:
    """A demand that finished: resolved by operator/automation or expired."""

    t: float
    outcome: str                  # resolved | automation | expired
    rt: float | None              # None for expired

    @property
    def resolved(self) -> bool:
        return self.outcome in ("resolved", "automation")


@dataclass
class PerformanceWindow:
    """Raw metric series for one scoring window."""

    t: float
    track_errors: list[float] = field(default_factory=list)
    fuel_in_band: list[float] = field(default_factory=list)   # 0..1 per sample
    fuel_levels: list[tuple[float, float]] = field(default_factory=list)
    sysmon: list[Closure] = field(default_factory=list)
    comms: list[Closure] = field(default_factory=list)


@dataclass(frozen=True)
class PerformanceSample:
    timestamp: float
    per_task: dict[Task, float]
    overall: float
    raw: dict

    def to_payload(self) -> dict:
        return {
            "per_task": {t.value: v for t, v in self.per_task.items()},
            "overall": self.overall,
            "raw": self.raw,
        }


def _rmse(errors: Sequence[float]) -> float:
    return sqrt(sum(e * e for e in errors) / len(errors))


def _demand_score(closures: Sequence[Closure], window: float) -> tuple[float, dict]:
    """Combined success-rate / reaction-time score over closed demands."""
    if not closures:
        return 1.0, {"total": 0, "resolved": 0}
    resolved = sum(1 for c in closures if c.resolved)
    rate = success_rate(resolved, len(closures))
    rt_mean = sum(reaction_score(c.rt, window) for c in closures) / len(closures)
    raw = {
        "total": len(closures),
        "resolved": resolved,
        "reaction_times": [c.rt for c in closures if c.rt is not None],
    }
    return 0.5 * rate + 0.5 * rt_mean, raw


def windowed_performance(
    data: PerformanceWindow,
    active: Iterable[Task],
    cfg: ScoringConfig,
) -> PerformanceSample:
    """Aggregate raw window metrics into per-task scores and the overall mean."""
    per_task: dict[Task, float] = {}
    raw: dict = {}

    if data.track_errors:
        rmse = _rmse(data.track_errors)
        per_task[Task.TRACKING] = tracking_score(rmse, cfg.r_max)
        raw["tracking_rmse"] = rmse
    if data.fuel_in_band:
        per_task[Task.RESMAN] = sum(data.fuel_in_band) / len(data.fuel_in_band)
        raw["fuel_levels"] = data.fuel_levels[-1] if data.fuel_levels else None
    sys_score, sys_raw = _demand_score(data.sysmon, cfg.sysmon_window_s)
    per_task[Task.SYSMON] = sys_score
    raw["sysmon"] = sys_raw
    comms_score, comms_raw = _demand_score(data.comms, cfg.comms_window_s)
    per_task[Task.COMMS] = comms_score
    raw["comms"] = comms_raw

    overall = overall_performance(per_task, active)
    return PerformanceSample(
        timestamp=data.t,
        per_task={t: per_task[t] for t in active},
        overall=overall,
        raw=raw,
    )


class SeriesBuffer:
    """Time-indexed sample store with O(log n) window slicing."""

    def __init__(self) -> None:
        self.times: list[float] = []
        self.values: list = []

    def append(self, t: float, value) -> None:
        self.times.append(t)
        self.values.append(value)

    def window(self, start: float, end: float) -> list:
        """Values with start < t <= end."""
        i = bisect_right(self.times, start)
        j = bisect_right(self.times, end)
        return self.values[i:j]

    def __len__(self) -> int:
        return len(self.times)
