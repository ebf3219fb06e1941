"""Deterministic tick-based simulation of the four-task battery."""
from .clock import SimClock
from .comms import CommsRequest, CommsState
from .conditions import (
    CONDITION_LABELS,
    ScheduledEvent,
    build_condition,
    initial_tracking_automatic,
    schedule_block_events,
)
from .inputs import OperatorInput, input_from_payload
from .layout import StationLayout, infer_active_tasks
from .resources import Pump, ResourceState, Tank
from .sysmon import OutOfRangeEvent, SysmonState
from .tracking import TrackingState, tracking_dynamics
from .world import Engine, Interaction, resman_desired_pumps

__all__ = [
    "CONDITION_LABELS",
    "CommsRequest",
    "CommsState",
    "Engine",
    "Interaction",
    "OperatorInput",
    "OutOfRangeEvent",
    "Pump",
    "ResourceState",
    "ScheduledEvent",
    "SimClock",
    "StationLayout",
    "SysmonState",
    "Tank",
    "TrackingState",
    "build_condition",
    "infer_active_tasks",
    "initial_tracking_automatic",
    "input_from_payload",
    "resman_desired_pumps",
    "schedule_block_events",
    "tracking_dynamics",
]
