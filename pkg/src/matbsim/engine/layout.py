"""Station layout: positions, adjacency, visibility, active-task inference.

The physical arrangement hides all but two stations from any point, so the
interface infers the operator's current task set from the station that owns
the last input source plus the station adjacent to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..config import LayoutConfig
from ..errors import ConfigError
from ..tasks import ALL_TASKS, Task
from .inputs import OperatorInput


@dataclass(frozen=True)
class StationLayout:
    positions: dict[Task, tuple[float, float]]
    adjacency: dict[Task, Task]
    walk_speed: float

    @classmethod
    def from_config(cls, cfg: LayoutConfig) -> "StationLayout":
        positions = {Task(name): tuple(pos) for name, pos in cfg.positions.items()}
        adjacency = {Task(a): Task(b) for a, b in cfg.adjacency.items()}
        if cfg.walk_speed <= 0:
            raise ConfigError("layout.walk_speed must be positive")
        return cls(positions=positions, adjacency=adjacency, walk_speed=cfg.walk_speed)

    def distance(self, a: Task, b: Task) -> float:
        (ax, ay), (bx, by) = self.positions[a], self.positions[b]
        return math.hypot(ax - bx, ay - by)

    def walk_time(self, a: Task, b: Task) -> float:
        return self.distance(a, b) / self.walk_speed

    def visible_from(self, station: Task) -> frozenset[Task]:
        """The station itself plus its adjacent one; never more than two."""
        return frozenset({station, self.adjacency[station]})


def infer_active_tasks(
    last_input: OperatorInput | None, layout: StationLayout
) -> frozenset[Task]:
    """Task owning the last input source plus its adjacent task.

    Before any input exists the whole battery counts as active (maximal
    contextual load).
    """
    if last_input is None:
        return frozenset(ALL_TASKS)
    src = last_input.task
    adjacent = layout.adjacency.get(src)
    return frozenset({src, adjacent}) if adjacent is not None else frozenset({src})
