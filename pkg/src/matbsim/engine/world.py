"""Deterministic tick engine for the four-task battery.

The engine owns all mutable world state. Each tick advances, in fixed order:
pump repairs and fuel flows, tracking dynamics, scheduled event firing,
demand expiry, automation auto-resolution, fuel-band edge detection, and the
1-Hz metric sampling that feeds scoring. All randomness flows through one
seeded generator, so identical (config, seed, input trace) reproduces the
identical world, tick for tick.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..config import ScenarioConfig
from ..errors import ConfigError
from ..scoring import Closure, PerformanceSample, PerformanceWindow, SeriesBuffer, windowed_performance
from ..tasks import ALL_TASKS, Task
from .clock import SimClock
from .comms import CommsRequest, CommsState
from .conditions import ScheduledEvent, initial_tracking_automatic
from .inputs import OperatorInput
from .layout import StationLayout, infer_active_tasks
from .resources import ResourceState
from .sysmon import GAUGE_TARGETS, OutOfRangeEvent, SysmonState
from .tracking import initial_tracking_state, tracking_dynamics

LogSink = Callable[[float, str, dict], None]


@dataclass(frozen=True)
class Interaction:
    """A moment the system needs to reach the operator about a task."""

    uid: int
    kind: str                     # tracking_mode | sysmon_oor | fuel_oor
    task: Task
    t: float
    payload: dict = field(default_factory=dict)


def resman_desired_pumps(resources: ResourceState, band: tuple[float, float]) -> dict[int, bool]:
    """Target pump configuration keeping the primary tanks inside the band.

    Shared by the resource-management autopilot and the synthetic operator:
    the infinite-source pump holds each primary level, the reserve pump kicks
    in when the level falls low or the primary inflow has failed, and the
    reserve tanks are topped up from the infinite tanks.
    """
    lo, hi = band
    mid = (lo + hi) / 2.0
    desired: dict[int, bool] = {7: False, 8: False}
    for tank_id, primary, backup in (("A", 2, 1), ("B", 4, 3)):
        level = resources.tanks[tank_id].level
        primary_ok = not resources.pumps[primary].failed
        desired[primary] = primary_ok and level < hi - 300.0
        desired[backup] = (level < lo + 300.0) or (not primary_ok and level < mid)
        if resources.pumps[backup].failed:
            desired[backup] = False
    for tank_id, refill in (("C", 5), ("D", 6)):
        tank = resources.tanks[tank_id]
        desired[refill] = (not resources.pumps[refill].failed) and (
            tank.level < 0.75 * tank.capacity
        )
    return desired


class Engine:
    """Single-timeline simulation of the battery under one workload condition
    schedule. External producers submit inputs through `apply_input`; every
    state change is reported through the log sink."""

    def __init__(self, cfg: ScenarioConfig, rng: np.random.Generator, log: LogSink):
        self.cfg = cfg
        self.rng = rng
        self.log = log
        self.clock = SimClock(tick_hz=cfg.engine.tick_hz)
        self.layout = StationLayout.from_config(cfg.layout)

        self.automation: dict[Task, bool] = {t: False for t in ALL_TASKS}
        self.tracking: TrackingState = initial_tracking_state(cfg.engine.tracking, False)
        self.joystick: tuple[float, float] = (0.0, 0.0)
        self.sysmon = SysmonState()
        self.resources = ResourceState.from_config(cfg.engine.fuel)
        self.comms = CommsState.from_config(cfg.engine.comms)
        self.last_input: OperatorInput | None = None

        self.condition_label: str | None = None
        self.condition = None
        self._events: list[ScheduledEvent] = []
        self._event_cursor = 0
        self._uid = 0
        self._interaction_uid = 0
        self._fuel_was_oor = False
        self._next_resman_control: float | None = None

        # Metric series (1-Hz) and demand closures feeding windowed scoring.
        self.track_series = SeriesBuffer()
        self.fuel_series = SeriesBuffer()
        self.sysmon_closures = SeriesBuffer()
        self.comms_closures = SeriesBuffer()

        self._sample_every = max(1, round(cfg.scoring.sample_period_s * cfg.engine.tick_hz))

    # ------------------------------------------------------------------
    # Block control
    # ------------------------------------------------------------------
    def start_block(self, label: str, condition, events: list[ScheduledEvent]) -> list[Interaction]:
        """Install a condition and its pre-scheduled events (absolute times).
        Returns the tracking mode-switch interaction when the block flips the
        baseline tracking mode."""
        now = self.clock.elapsed
        self.condition_label = label
        self.condition = condition
        self._events.extend(events)
        self._event_cursor = min(self._event_cursor, len(self._events))
        self.log(now, "block", {"label": label})
        return self._set_tracking_mode(initial_tracking_automatic(condition), source="condition")

    # ------------------------------------------------------------------
    # Tick
    # ------------------------------------------------------------------
    def advance_tick(self) -> list[Interaction]:
        """Advance one tick; returns interactions born this tick."""
        now = self.clock.advance()
        dt = self.clock.tick_seconds
        interactions: list[Interaction] = []

        self.resources.step(dt, now)
        self.tracking = tracking_dynamics(
            self.tracking, self.joystick, dt, self.rng, self.cfg.engine.tracking
        )

        while self._event_cursor < len(self._events) and self._events[self._event_cursor].t <= now:
            interactions.extend(self._fire(self._events[self._event_cursor], now))
            self._event_cursor += 1

        self._expire(now)
        self._auto_resolve(now)

        a_in, b_in = self.resources.primaries_in_band(self.cfg.engine.fuel.band)
        fuel_oor = not (a_in and b_in)
        if fuel_oor and not self._fuel_was_oor:
            interactions.append(self._new_interaction("fuel_oor", Task.RESMAN, now))
        self._fuel_was_oor = fuel_oor

        if self.clock.tick_index % self._sample_every == 0:
            err = self.tracking.error
            self.track_series.append(now, err)
            self.log(now, "track", {"err": err})
            a = self.resources.tanks["A"].level
            b = self.resources.tanks["B"].level
            in_band = (float(a_in) + float(b_in)) / 2.0
            self.fuel_series.append(now, (in_band, a, b))
            self.log(now, "fuel", {"a": a, "b": b, "in_band": in_band})

        return interactions

    def _fire(self, event: ScheduledEvent, now: float) -> list[Interaction]:
        kind, payload = event.kind, event.payload
        if kind == "sysmon":
            self._uid += 1
            window = self.cfg.engine.sysmon.window_s
            ev = OutOfRangeEvent(
                uid=self._uid,
                target=payload["target"],
                t_start=now,
                deadline=now + window,
            )
            if self.automation[Task.SYSMON]:
                ev.auto_resolve_at = now + self.cfg.engine.automation_latency_s
            self.sysmon.pending.append(ev)
            self.log(now, "event", {"kind": "sysmon", "uid": ev.uid, "target": ev.target})
            return [self._new_interaction("sysmon_oor", Task.SYSMON, now, {"uid": ev.uid})]
        if kind == "pump_failure":
            operational = self.resources.operational_pumps()
            if not operational:
                self.log(now, "event", {"kind": "pump_failure", "pump": None})
                return []
            pid = operational[int(self.rng.integers(0, len(operational)))]
            self.resources.fail_pump(pid, now + self.cfg.engine.fuel.pump_repair_s)
            self.log(now, "event", {"kind": "pump_failure", "pump": pid})
            return []
        if kind == "comms_request":
            self._uid += 1
            req = CommsRequest(
                uid=self._uid,
                callsign=payload["callsign"],
                radio=payload["radio"],
                frequency=payload["frequency"],
                issued_at=now,
                deadline=now + self.cfg.engine.comms.response_window_s,
                audio_until=now + self.cfg.engine.comms.audio_s,
            )
            self.comms.pending.append(req)
            self.log(
                now,
                "event",
                {
                    "kind": "comms_request",
                    "uid": req.uid,
                    "callsign": req.callsign,
                    "radio": req.radio,
                    "frequency": req.frequency,
                },
            )
            return []
        if kind == "tracking_mode":
            return self._set_tracking_mode(payload["automatic"], source="condition")
        raise ConfigError(f"unknown scheduled event kind {kind!r}")

    def _expire(self, now: float) -> None:
        for ev in [e for e in self.sysmon.pending if e.deadline <= now]:
            self._close_sysmon(ev, "expired", now)
        for req in [r for r in self.comms.pending if r.deadline <= now]:
            self._close_comms(req, "expired", now)

    def _auto_resolve(self, now: float) -> None:
        latency = self.cfg.engine.automation_latency_s
        if self.automation[Task.SYSMON]:
            for ev in [e for e in self.sysmon.pending if e.auto_resolve_at is not None and e.auto_resolve_at <= now]:
                self._close_sysmon(ev, "automation", now)
        if self.automation[Task.COMMS]:
            for req in [
                r
                for r in self.comms.pending
                if r.is_own(self.comms.own_callsign) and now >= r.issued_at + latency
            ]:
                self.comms.radios[req.radio] = req.frequency
                self._close_comms(req, "automation", now)
        if self.automation[Task.RESMAN] and (
            self._next_resman_control is None or now >= self._next_resman_control
        ):
            desired = resman_desired_pumps(self.resources, self.cfg.engine.fuel.band)
            for pid in sorted(desired):
                pump = self.resources.pumps[pid]
                if pump.failed or pump.on == desired[pid]:
                    continue
                pump.on = desired[pid]
                self.log(now, "pump_auto", {"pump": pid, "on": pump.on})
            self._next_resman_control = now + latency

    # ------------------------------------------------------------------
    # Demand closure
    # ------------------------------------------------------------------
    def _close_sysmon(self, ev: OutOfRangeEvent, outcome: str, now: float) -> None:
        self.sysmon.pending.remove(ev)
        rt = None if outcome == "expired" else now - ev.t_start
        self.sysmon_closures.append(now, Closure(now, outcome, rt))
        self.log(
            now,
            "resolve",
            {"task": "sysmon", "uid": ev.uid, "target": ev.target, "outcome": outcome, "rt": rt},
        )

    def _close_comms(self, req: CommsRequest, outcome: str, now: float) -> None:
        self.comms.pending.remove(req)
        own = req.is_own(self.comms.own_callsign)
        if outcome == "expired" and not own:
            outcome = "ignored"   # correctly ignoring foreign traffic is not a failure
        rt = None if outcome in ("expired", "ignored") else now - req.issued_at
        if own:
            self.comms_closures.append(now, Closure(now, outcome, rt))
        self.log(
            now,
            "resolve",
            {"task": "comms", "uid": req.uid, "own": own, "outcome": outcome, "rt": rt},
        )

    # ------------------------------------------------------------------
    # Operator input
    # ------------------------------------------------------------------
    def apply_input(self, inp: OperatorInput) -> None:
        now = self.clock.elapsed
        self.log(now, "input", inp.to_payload())
        self.last_input = inp

        task_action = inp.kind in ("joystick_vector", "mouse_click", "key_press", "speech_utterance")
        if task_action and self.automation[inp.task]:
            self.log(now, "input_ignored", {"task": inp.task.value, "reason": "automated"})
            return

        if inp.kind == "joystick_vector":
            self.joystick = (inp.payload.get("x", 0.0), inp.payload.get("y", 0.0))
        elif inp.kind in ("mouse_click", "key_press"):
            self._dispatch_click(inp, now)
        elif inp.kind == "speech_utterance":
            if not self.comms.speech_mode:
                self.log(now, "speech_ignored", {"reason": "speech mode off"})
                return
            req = self.comms.oldest_own()
            if req is None:
                self.log(now, "speech_ignored", {"reason": "no pending request"})
                return
            self.comms.radios[req.radio] = req.frequency
            self._close_comms(req, "resolved", now)
        elif inp.kind == "move_to_station":
            pass  # movement itself changes no task state; last_input already updated

    def _dispatch_click(self, inp: OperatorInput, now: float) -> None:
        target = inp.payload.get("target")
        if target in ("green", "red") or target in GAUGE_TARGETS:
            ev = self.sysmon.pending_for(target)
            if ev is not None:
                self._close_sysmon(ev, "resolved", now)
            else:
                self.log(now, "false_alarm", {"task": "sysmon", "target": target})
        elif target == "pump":
            pid = int(inp.payload["pump"])
            pump = self.resources.pumps[pid]
            if pump.failed:
                self.log(now, "pump_failed_click", {"pump": pid})
                return
            pump.on = not pump.on
        elif target == "radio":
            radio = inp.payload["radio"]
            frequency = float(inp.payload["frequency"])
            if radio not in self.comms.radios:
                self.log(now, "false_alarm", {"task": "comms", "radio": radio})
                return
            self.comms.radios[radio] = frequency
            req = self.comms.match_tuning(radio, frequency)
            if req is not None:
                self._close_comms(req, "resolved", now)
            else:
                self.log(now, "false_alarm", {"task": "comms", "radio": radio})
        else:
            self.log(now, "false_alarm", {"task": inp.task.value, "target": target})

    # ------------------------------------------------------------------
    # Automation
    # ------------------------------------------------------------------
    def set_task_automation(self, task: Task, on: bool, source: str = "policy") -> list[Interaction]:
        """Flip a task's automation flag; idempotent. Returns the tracking
        mode-switch interaction when the flip changes the tracking mode."""
        now = self.clock.elapsed
        if self.automation[task] == on:
            return []
        self.automation[task] = on
        self.log(now, "automation", {"task": task.value, "on": on, "source": source})
        interactions: list[Interaction] = []
        if task == Task.TRACKING:
            self.tracking = replace(self.tracking, automatic=on)
            interactions.append(
                self._new_interaction("tracking_mode", task, now, {"automatic": on})
            )
        elif task == Task.SYSMON and on:
            latency = self.cfg.engine.automation_latency_s
            for ev in self.sysmon.pending:
                ev.auto_resolve_at = now + latency
        elif task == Task.RESMAN:
            self._next_resman_control = now if on else None
        return interactions

    def _set_tracking_mode(self, automatic: bool, source: str) -> list[Interaction]:
        # Condition policy owns the baseline tracking mode; it writes the same
        # automation flag the adaptation policy does (last writer wins).
        if self.automation[Task.TRACKING] != automatic:
            return self.set_task_automation(Task.TRACKING, automatic, source=source)
        return []

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------
    def out_of_range(self, task: Task) -> bool:
        if task == Task.TRACKING:
            return (not self.tracking.automatic) and (
                self.tracking.error > self.cfg.engine.tracking.alert_radius
            )
        if task == Task.SYSMON:
            return self.sysmon.out_of_range
        if task == Task.RESMAN:
            a_in, b_in = self.resources.primaries_in_band(self.cfg.engine.fuel.band)
            return not (a_in and b_in)
        return self.comms.out_of_range

    def active_tasks(self) -> frozenset[Task]:
        return infer_active_tasks(self.last_input, self.layout)

    def _new_interaction(self, kind: str, task: Task, now: float, payload: dict | None = None) -> Interaction:
        self._interaction_uid += 1
        inter = Interaction(self._interaction_uid, kind, task, now, payload or {})
        self.log(now, "interaction", {"uid": inter.uid, "kind": kind, "task": task.value, **inter.payload})
        return inter

    # ------------------------------------------------------------------
    # Scoring
    # ------------------------------------------------------------------
    def performance_window(self, now: float, window_s: float) -> PerformanceWindow:
        start = now - window_s
        fuel = self.fuel_series.window(start, now)
        return PerformanceWindow(
            t=now,
            track_errors=self.track_series.window(start, now),
            fuel_in_band=[f[0] for f in fuel],
            fuel_levels=[(f[1], f[2]) for f in fuel],
            sysmon=self.sysmon_closures.window(start, now),
            comms=self.comms_closures.window(start, now),
        )

    def performance_sample(self, now: float) -> PerformanceSample:
        data = self.performance_window(now, self.cfg.scoring.perf_window_s)
        return windowed_performance(data, sorted(self.active_tasks()), self.cfg.scoring)
