"""Simulation clock: integer ticks at a fixed rate."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class SimClock:
    tick_hz: int = 20
    tick_index: int = 0

    @property
    def tick_seconds(self) -> float:
        return 1.0 / self.tick_hz

    @property
    def elapsed(self) -> float:
        # Integer-tick division keeps 5-s cadence timestamps exact.
        return self.tick_index / self.tick_hz

    def advance(self) -> float:
        self.tick_index += 1
        return self.elapsed
