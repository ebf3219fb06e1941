"""Workload-condition parameter bundles and count-exact event scheduling.

The scheduler is count-exact, not Poisson: each full minute of a block gets
exactly the configured number of events (sampled once per minute for ranged
rates), uniformly jittered inside that minute; a trailing partial minute is
pro-rated by floor(rate x fraction).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ..config import CommsConfig, ConditionConfig
from ..errors import ConfigError

CONDITION_LABELS = ("UL", "NL", "OL")

SYSMON_TARGETS = ("green", "red", "gauge1", "gauge2", "gauge3", "gauge4")


@dataclass(frozen=True)
class ScheduledEvent:
    t: float
    kind: str                     # sysmon | pump_failure | comms_request | tracking_mode
    payload: dict = field(default_factory=dict)


def build_condition(label: str, table: dict[str, ConditionConfig] | None = None) -> ConditionConfig:
    """Look up the parameter bundle for a workload-condition label."""
    from ..config import default_conditions

    table = table if table is not None else default_conditions()
    if label not in table:
        raise ConfigError(f"unknown workload condition label: {label!r}")
    return table[label]


def _minutes(block_duration: float) -> Iterator[tuple[int, float, float]]:
    """(minute index, start second, length) covering the block."""
    full = int(block_duration // 60.0)
    for m in range(full):
        yield m, m * 60.0, 60.0
    remainder = block_duration - full * 60.0
    if remainder > 1e-9:
        yield full, full * 60.0, remainder


def _minute_count(rate: float, length: float) -> int:
    if length >= 60.0 - 1e-9:
        return int(rate)
    return int(np.floor(rate * (length / 60.0)))


def schedule_block_events(
    condition: ConditionConfig,
    block_duration: float,
    rng: np.random.Generator,
    comms: CommsConfig | None = None,
) -> list[ScheduledEvent]:
    """Generate all task events for one block, timestamps relative to block start."""
    comms = comms or CommsConfig()
    events: list[ScheduledEvent] = []

    for minute, start, length in _minutes(block_duration):
        n_sysmon = _minute_count(condition.sysmon_events_per_min, length)
        for _ in range(n_sysmon):
            t = start + rng.uniform(0.0, length)
            target = SYSMON_TARGETS[rng.integers(0, len(SYSMON_TARGETS))]
            events.append(ScheduledEvent(t, "sysmon", {"target": target}))

        lo, hi = condition.pump_failures_per_min
        if condition.pump_failure_alternate and minute % 2 == 0:
            pump_rate = 0
        elif hi > 0:
            pump_rate = int(rng.integers(lo, hi + 1))
        else:
            pump_rate = 0
        for _ in range(_minute_count(pump_rate, length)):
            t = start + rng.uniform(0.0, length)
            events.append(ScheduledEvent(t, "pump_failure", {}))

        lo, hi = condition.comms_requests_per_min
        comms_rate = int(rng.integers(lo, hi + 1)) if hi > 0 else 0
        for _ in range(_minute_count(comms_rate, length)):
            t = start + rng.uniform(0.0, length)
            own = rng.random() >= comms.foreign_ratio
            callsign = (
                comms.own_callsign
                if own
                else comms.foreign_callsigns[rng.integers(0, len(comms.foreign_callsigns))]
            )
            radio = comms.radios[rng.integers(0, len(comms.radios))]
            step_count = int(round((comms.freq_high - comms.freq_low) / 0.025))
            frequency = round(comms.freq_low + 0.025 * rng.integers(0, step_count + 1), 3)
            events.append(
                ScheduledEvent(
                    t,
                    "comms_request",
                    {"callsign": callsign, "radio": radio, "frequency": frequency},
                )
            )

    if condition.tracking_mode_policy == "alternate":
        automatic = condition.tracking_alternate_start != "manual"
        t = condition.tracking_alternate_s
        while t < block_duration - 1e-9:
            automatic = not automatic
            events.append(ScheduledEvent(t, "tracking_mode", {"automatic": automatic}))
            t += condition.tracking_alternate_s

    events.sort(key=lambda e: e.t)
    return events


def initial_tracking_automatic(condition: ConditionConfig) -> bool:
    policy = condition.tracking_mode_policy
    if policy == "always_auto":
        return True
    if policy == "always_manual":
        return False
    if policy == "alternate":
        return condition.tracking_alternate_start != "manual"
    raise ConfigError(f"unknown tracking_mode_policy {policy!r}")
