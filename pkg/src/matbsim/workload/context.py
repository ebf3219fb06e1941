"""Contextual workload features from the active task set.

A configurable table assigns each task a nominal load on every workload
component; the contextual feature vector is the element-wise sum of the rows
for the currently active tasks. This replaces an external task-network
workload model with a documented fixture.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..config import COMPONENT_RANGES, WORKLOAD_COMPONENTS, PipelineConfig
from ..errors import ConfigError
from ..tasks import Task

CONTEXT_DIM = len(WORKLOAD_COMPONENTS)


@dataclass(frozen=True)
class ContextTable:
    rows: dict[Task, tuple[float, ...]]

    def __post_init__(self) -> None:
        for task, row in self.rows.items():
            if len(row) != CONTEXT_DIM:
                raise ConfigError(f"context row for {task} must have {CONTEXT_DIM} entries")
            if any(v < 0 for v in row):
                raise ConfigError(f"context row for {task} has negative entries")
        totals = np.sum([self.rows[t] for t in self.rows], axis=0)
        for name, total in zip(WORKLOAD_COMPONENTS, totals):
            if total > COMPONENT_RANGES[name] + 1e-9:
                raise ConfigError(
                    f"context table sums to {total} on {name},"
                    f" beyond its range {COMPONENT_RANGES[name]}"
                )

    @classmethod
    def from_config(cls, cfg: PipelineConfig) -> "ContextTable":
        return cls(rows={Task(name): tuple(row) for name, row in cfg.context_table.items()})


def contextual_features(active: Iterable[Task], table: ContextTable) -> np.ndarray:
    """Element-wise sum of the table rows for the active tasks."""
    active = list(active)
    if not active:
        raise ConfigError("active task set must not be empty")
    out = np.zeros(CONTEXT_DIM, dtype=float)
    for task in active:
        if task not in table.rows:
            raise ConfigError(f"context table has no row for task {task!r}")
        out += np.asarray(table.rows[task], dtype=float)
    return out
