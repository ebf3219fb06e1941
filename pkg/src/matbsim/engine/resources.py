"""Resource management task: six fuel tanks, eight pumps.

Tanks A and B are the primaries, drained continuously and topped up through
the pump network. C and D hold finite reserves; E and F are infinite.
Default pump routing (source -> sink), overridable per scenario:

    1: C->A   2: E->A   3: D->B   4: F->B
    5: E->C   6: F->D   7: A->B   8: B->A
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..config import FuelConfig

DEFAULT_ROUTES: dict[int, tuple[str, str]] = {
    1: ("C", "A"),
    2: ("E", "A"),
    3: ("D", "B"),
    4: ("F", "B"),
    5: ("E", "C"),
    6: ("F", "D"),
    7: ("A", "B"),
    8: ("B", "A"),
}

PRIMARY_TANKS = ("A", "B")
INFINITE_TANKS = ("E", "F")


@dataclass
class Tank:
    id: str
    level: float
    capacity: float | None        # None -> infinite supply


@dataclass
class Pump:
    id: int
    source: str
    sink: str
    rate: float                   # units/minute while on and operational
    on: bool = False
    failed_until: float | None = None

    @property
    def failed(self) -> bool:
        return self.failed_until is not None


@dataclass
class ResourceState:
    tanks: dict[str, Tank]
    pumps: dict[int, Pump]
    consumption: float            # units/minute drained from each primary tank

    @classmethod
    def from_config(cls, cfg: FuelConfig) -> "ResourceState":
        tanks = {
            "A": Tank("A", cfg.start_ab, cfg.capacity_ab),
            "B": Tank("B", cfg.start_ab, cfg.capacity_ab),
            "C": Tank("C", cfg.start_cd, cfg.capacity_cd),
            "D": Tank("D", cfg.start_cd, cfg.capacity_cd),
            "E": Tank("E", 0.0, None),
            "F": Tank("F", 0.0, None),
        }
        pumps = {
            pid: Pump(pid, src, dst, cfg.pump_rate)
            for pid, (src, dst) in DEFAULT_ROUTES.items()
        }
        return cls(tanks=tanks, pumps=pumps, consumption=cfg.consumption)

    def operational_pumps(self) -> list[int]:
        return [pid for pid, p in self.pumps.items() if not p.failed]

    def step(self, dt: float, now: float) -> None:
        """One tick of repairs, pump flows, and primary-tank consumption."""
        for pump in self.pumps.values():
            if pump.failed and now >= pump.failed_until:
                pump.failed_until = None
                pump.on = False   # repaired pumps come back switched off

        for pid in sorted(self.pumps):
            pump = self.pumps[pid]
            if not pump.on or pump.failed:
                continue
            amount = pump.rate * dt / 60.0
            source, sink = self.tanks[pump.source], self.tanks[pump.sink]
            if source.capacity is not None:
                amount = min(amount, source.level)
            if sink.capacity is not None:
                amount = min(amount, sink.capacity - sink.level)
            if amount <= 0.0:
                continue
            if source.capacity is not None:
                source.level -= amount
            sink.level += amount

        for tid in PRIMARY_TANKS:
            tank = self.tanks[tid]
            tank.level = max(0.0, tank.level - self.consumption * dt / 60.0)

    def fail_pump(self, pid: int, until: float) -> None:
        self.pumps[pid].failed_until = until

    def primaries_in_band(self, band: tuple[float, float]) -> tuple[bool, bool]:
        lo, hi = band
        a, b = self.tanks["A"].level, self.tanks["B"].level
        return (lo <= a <= hi, lo <= b <= hi)
