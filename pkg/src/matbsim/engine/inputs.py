"""Operator input events."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..tasks import Task

INPUT_KINDS = (
    "joystick_vector",
    "mouse_click",
    "key_press",
    "speech_utterance",
    "move_to_station",
)


@dataclass(frozen=True)
class OperatorInput:
    kind: str
    task: Task
    timestamp: float
    payload: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in INPUT_KINDS:
            raise ValueError(f"unknown input kind {self.kind!r}")
        if self.kind == "joystick_vector":
            x, y = self.payload.get("x", 0.0), self.payload.get("y", 0.0)
            if math.hypot(x, y) > 1.0 + 1e-9:
                raise ValueError("joystick vector magnitude must be <= 1")

    def to_payload(self) -> dict:
        out = {"kind": self.kind, "task": self.task.value}
        if self.payload:
            out["data"] = self.payload
        return out


def input_from_payload(t: float, data: dict) -> OperatorInput:
    return OperatorInput(
        kind=data["kind"],
        task=Task(data["task"]),
        timestamp=t,
        payload=data.get("data", {}),
    )
