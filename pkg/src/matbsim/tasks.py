"""Identifiers for the four battery stations."""
from __future__ import annotations

from enum import Enum


class Task(str, Enum):
    TRACKING = "tracking"
    SYSMON = "sysmon"
    RESMAN = "resman"
    COMMS = "comms"

    def __str__(self) -> str:  # keep log payloads plain
        return self.value


ALL_TASKS: tuple[Task, ...] = (Task.TRACKING, Task.SYSMON, Task.RESMAN, Task.COMMS)

TASK_NAMES = {
    Task.TRACKING: "tracking",
    Task.SYSMON: "system monitoring",
    Task.RESMAN: "resource management",
    Task.COMMS: "communications",
}
