"""System monitoring task: two warning lights and four gauges."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .conditions import SYSMON_TARGETS

GAUGE_TARGETS = ("gauge1", "gauge2", "gauge3", "gauge4")


@dataclass
class OutOfRangeEvent:
    uid: int
    target: str                   # green | red | gauge1..gauge4
    t_start: float
    deadline: float
    auto_resolve_at: float | None = None


@dataclass
class SysmonState:
    pending: list[OutOfRangeEvent] = field(default_factory=list)

    def pending_for(self, target: str) -> OutOfRangeEvent | None:
        for ev in self.pending:
            if ev.target == target:
                return ev
        return None

    @property
    def green_on(self) -> bool:
        # The green light is normally lit; an event turns it off.
        return self.pending_for("green") is None

    @property
    def red_on(self) -> bool:
        # The red light is normally off; an event turns it on.
        return self.pending_for("red") is not None

    def gauge_out_of_range(self, index: int) -> bool:
        return self.pending_for(GAUGE_TARGETS[index]) is not None

    def indicator_pos(self, index: int, t: float) -> float:
        """Gauge needle position in [0,1]; pegged while out of range."""
        if self.gauge_out_of_range(index):
            return 0.95 if index % 2 == 0 else 0.05
        return 0.5 + 0.22 * math.sin(2.0 * math.pi * (t / 7.0 + index / 4.0))

    @property
    def out_of_range(self) -> bool:
        return bool(self.pending)


def valid_target(target: str) -> bool:
    return target in SYSMON_TARGETS
