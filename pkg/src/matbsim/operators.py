"""Synthetic operator: a parameterized stand-in for a human crew member.

The operator walks between stations (seeing at most two at a time), reacts
to demands with condition-dependent delays, answers own-callsign radio
traffic (by voice when the speech modality is on), and continuously emits
the eight physiological channels as baseline + gain x smoothed induced load
+ seeded noise. The instantaneous induced load doubles as the ground-truth
label source for estimator training.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from .config import PHYSIO_CHANNELS, WORKLOAD_COMPONENTS
from .engine.inputs import OperatorInput
from .engine.layout import StationLayout
from .engine.world import Engine, resman_desired_pumps
from .errors import ConfigError
from .tasks import ALL_TASKS, Task
from .workload.features import PhysioSample

if TYPE_CHECKING:
    from .policy import InteractionPlan


@dataclass(frozen=True)
class InducedLoad:
    cognitive: float
    physical: float
    visual: float
    auditory: float
    speech: float

    def as_dict(self) -> dict[str, float]:
        return {
            "cognitive": self.cognitive,
            "physical": self.physical,
            "visual": self.visual,
            "auditory": self.auditory,
            "speech": self.speech,
        }

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"induced {name} load {value} outside [0,1]")


@dataclass(frozen=True)
class OperatorProfile:
    name: str = "nominal"
    base_rt: dict[str, float] = field(
        default_factory=lambda: {
            "tracking": 0.8,
            "sysmon": 1.6,
            "resman": 2.0,
            "comms": 2.6,
        }
    )
    rt_inflation: float = 0.15          # fraction added per extra pending demand
    rt_sigma_frac: float = 0.20
    walk_speed: float = 1.0             # m/s
    utterance_s: float = 4.0            # full spoken radio response
    readback_s: float = 4.0             # spoken acknowledgment with a manual tune
    patrol_interval_s: float = 9.0
    memory_horizon_s: float = 60.0
    joystick_period_s: float = 0.25
    joystick_kp: float = 0.02           # deflection per pixel of error
    noise_frac: float = 0.05            # physio noise sigma as fraction of gain
    smoothing_tau_s: float = 5.0
    physio_baseline: dict[str, float] = field(
        default_factory=lambda: {
            "heart_rate": 70.0,
            "hr_variability": 45.0,
            "respiration_rate": 14.0,
            "posture_magnitude": 5.0,
            "noise_level": 38.0,
            "speech_rate": 3.5,
            "speech_intensity": 60.0,
            "pitch": 120.0,
        }
    )
    # channel -> component -> gain; all gains non-negative so raising a load
    # component never lowers a mapped channel.
    physio_gains: dict[str, dict[str, float]] = field(
        default_factory=lambda: {
            "heart_rate": {"cognitive": 20.0, "physical": 12.0},
            "hr_variability": {"cognitive": 18.0},
            "respiration_rate": {"physical": 8.0, "cognitive": 3.0},
            "posture_magnitude": {"physical": 30.0, "visual": 8.0},
            "noise_level": {"auditory": 22.0},
            "speech_rate": {"speech": 1.5},
            "speech_intensity": {"speech": 15.0},
            "pitch": {"speech": 40.0},
        }
    )
    speech_gated: tuple[str, ...] = ("speech_rate", "speech_intensity", "pitch")


_PRESETS: dict[str, dict] = {
    "nominal": {},
    "slow": {"rt_sigma_frac": 0.25, "walk_speed": 0.7, "patrol_interval_s": 14.0},
    "deterministic-zero-noise": {"rt_sigma_frac": 0.0, "noise_frac": 0.0},
}


def make_profile(name: str = "nominal", overrides: dict | None = None) -> OperatorProfile:
    if name not in _PRESETS:
        raise ConfigError(f"unknown operator profile {name!r}")
    profile = OperatorProfile(name=name)
    profile = replace(profile, **_PRESETS[name])
    if overrides:
        known = set(profile.__dataclass_fields__)
        bad = set(overrides) - known
        if bad:
            raise ConfigError(f"unknown operator profile fields: {sorted(bad)}")
        if name == "slow":
            overrides = dict(overrides)
            overrides.setdefault("base_rt", {k: v * 1.6 for k, v in profile.base_rt.items()})
        profile = replace(profile, **overrides)
    elif name == "slow":
        profile = replace(profile, base_rt={k: v * 1.6 for k, v in profile.base_rt.items()})
    return profile


class PhysioSynth:
    """Physiological channel synthesis shared by the synthetic operator and
    the console session's behavior proxies."""

    def __init__(self, profile: OperatorProfile, rng: np.random.Generator):
        self.profile = profile
        self.rng = rng
        self.smoothed = {name: 0.0 for name in WORKLOAD_COMPONENTS}

    def step(self, load: InducedLoad, speaking: bool, now: float, dt: float) -> PhysioSample:
        p = self.profile
        alpha = 1.0 - math.exp(-dt / p.smoothing_tau_s)
        targets = load.as_dict()
        for name in WORKLOAD_COMPONENTS:
            self.smoothed[name] += (targets[name] - self.smoothed[name]) * alpha

        values: dict[str, float] = {}
        for channel in PHYSIO_CHANNELS:
            gains = p.physio_gains.get(channel, {})
            level = sum(g * self.smoothed[c] for c, g in gains.items())
            total_gain = sum(gains.values())
            noise = (
                self.rng.normal(0.0, p.noise_frac * total_gain)
                if p.noise_frac > 0 and total_gain > 0
                else 0.0
            )
            if channel in p.speech_gated:
                values[channel] = (
                    max(0.0, p.physio_baseline[channel] + level + noise) if speaking else 0.0
                )
            else:
                values[channel] = max(0.0, p.physio_baseline[channel] + level + noise)
        return PhysioSample(t=now, **values)


@dataclass
class Demand:
    key: tuple
    task: Task
    deadline: float
    discovered_at: float
    data: dict = field(default_factory=dict)


_PATROL_CYCLE = (Task.TRACKING, Task.SYSMON, Task.RESMAN, Task.COMMS)

_FUEL_DEADLINE_S = 20.0
_TRACKING_DEADLINE_S = 12.0
_URGENCY_BUCKET_S = 5.0   # demands expiring within the same bucket count as
                          # equally urgent; the nearer one wins (less commuting)


class SyntheticOperator:
    """Deterministic (seeded) operator over an engine it can only partially
    see: the current station, the adjacent one, globally audible radio
    traffic, and whatever stimuli the adaptive system delivers."""

    kind = "synthetic"
    provides_ground_truth = True

    def __init__(
        self,
        profile: OperatorProfile,
        engine: Engine,
        rng: np.random.Generator,
        start_station: Task = Task.TRACKING,
    ):
        self.profile = profile
        self.engine = engine
        self.layout: StationLayout = engine.layout
        self.rng = rng
        self.station = start_station
        self.walking_to: Task | None = None
        self.arrive_at = 0.0
        self.action: tuple[float, Demand] | None = None
        self.known: dict[tuple, Demand] = {}
        self.speaking_until: float | None = None
        self.speak_demand: Demand | None = None
        self.readback_until = -math.inf
        self.next_patrol = profile.patrol_interval_s
        self.next_joystick = 0.0
        self.joystick_engaged = False
        self.last_aud_stim = -math.inf
        self.recent_visual_demands: deque[float] = deque(maxlen=256)
        self.synth = PhysioSynth(profile, rng)

    # ------------------------------------------------------------------
    # Perception
    # ------------------------------------------------------------------
    def visible(self) -> frozenset[Task]:
        if self.walking_to is not None:
            # mid-walk the operator faces the destination station
            return frozenset({self.walking_to})
        return self.layout.visible_from(self.station)

    def notify_stimulus(self, plan: "InteractionPlan", now: float) -> None:
        """Adaptive stimulus delivery: auditory cues are heard anywhere,
        visual ones only register when that station is currently visible."""
        auditory = plan.stimulus == "auditory"
        if auditory:
            self.last_aud_stim = now
        if auditory or plan.task in self.visible():
            self._discover_task_demands(plan.task, now, force=True)

    def _discover_task_demands(self, task: Task, now: float, force: bool = False) -> None:
        eng = self.engine
        if eng.automation.get(task):
            return
        if task == Task.SYSMON:
            for ev in eng.sysmon.pending:
                key = ("sysmon", ev.uid)
                if key not in self.known:
                    self.known[key] = Demand(key, task, ev.deadline, now, {"target": ev.target})
                    self.recent_visual_demands.append(now)
        elif task == Task.RESMAN:
            if eng.out_of_range(Task.RESMAN) or self._pump_changes_needed():
                key = ("fuel",)
                if key not in self.known:
                    self.known[key] = Demand(key, task, now + _FUEL_DEADLINE_S, now)
                    self.recent_visual_demands.append(now)
        elif task == Task.TRACKING:
            if not eng.tracking.automatic and eng.tracking.error > eng.cfg.engine.tracking.alert_radius:
                key = ("tracking",)
                if key not in self.known:
                    self.known[key] = Demand(key, task, now + _TRACKING_DEADLINE_S, now)
                    self.recent_visual_demands.append(now)

    def _perceive(self, now: float) -> None:
        eng = self.engine
        # Own-callsign radio traffic is audible everywhere.
        if not eng.automation[Task.COMMS]:
            for req in eng.comms.pending_own():
                key = ("comms", req.uid)
                if key not in self.known:
                    self.known[key] = Demand(
                        key,
                        Task.COMMS,
                        req.deadline,
                        now,
                        {"radio": req.radio, "frequency": req.frequency},
                    )
        for task in self.visible():
            self._discover_task_demands(task, now)
        self._prune(now)

    def _prune(self, now: float) -> None:
        eng = self.engine
        gone: list[tuple] = []
        visible = self.visible()
        pending_sysmon = {ev.uid for ev in eng.sysmon.pending}
        pending_comms = {r.uid for r in eng.comms.pending_own()}
        for key, demand in self.known.items():
            if demand.key[0] == "sysmon" and demand.key[1] not in pending_sysmon:
                gone.append(key)
                continue
            if demand.key[0] == "comms" and demand.key[1] not in pending_comms:
                gone.append(key)
                continue
            if demand.key[0] == "fuel" and Task.RESMAN in visible:
                if not (eng.out_of_range(Task.RESMAN) or self._pump_changes_needed()):
                    gone.append(key)
                    continue
            if demand.key[0] == "tracking" and (
                eng.tracking.automatic
                or eng.tracking.error <= eng.cfg.engine.tracking.alert_radius * 0.25
            ):
                gone.append(key)
                continue
            if now > demand.deadline + 1.0:
                gone.append(key)
                continue
            if now - demand.discovered_at > self.profile.memory_horizon_s:
                gone.append(key)
                continue
            if eng.automation.get(demand.task):
                gone.append(key)
        for key in gone:
            self.known.pop(key, None)

    def _pump_changes_needed(self) -> list[tuple[int, bool]]:
        desired = resman_desired_pumps(self.engine.resources, self.engine.cfg.engine.fuel.band)
        return [
            (pid, want)
            for pid, want in sorted(desired.items())
            if not self.engine.resources.pumps[pid].failed
            and self.engine.resources.pumps[pid].on != want
        ]

    # ------------------------------------------------------------------
    # Acting
    # ------------------------------------------------------------------
    def step(self, now: float, dt: float) -> list[OperatorInput]:
        self._perceive(now)
        out: list[OperatorInput] = []

        # Voice interaction is hands-free: it completes (and may start) in
        # parallel with walking and manual actions.
        if self.speaking_until is not None and now >= self.speaking_until:
            out.append(OperatorInput("speech_utterance", Task.COMMS, now))
            if self.speak_demand is not None:
                self.known.pop(self.speak_demand.key, None)
            self.speaking_until = None
            self.speak_demand = None
        if self.engine.comms.speech_mode and self.speaking_until is None:
            voice = self._oldest_comms_demand()
            if voice is not None:
                self.speaking_until = now + self.profile.utterance_s
                self.speak_demand = voice

        if self.walking_to is not None:
            if now < self.arrive_at:
                return out
            self.station = self.walking_to
            self.walking_to = None

        if self.action is not None:
            fire_at, demand = self.action
            if now < fire_at:
                return out
            self.action = None
            inp = self._input_for(demand, now)
            if inp is not None:
                out.append(inp)
            if demand.key[0] != "fuel":
                self.known.pop(demand.key, None)
            return out

        demand = self._choose_demand(now)
        if demand is not None:
            out.extend(self._pursue(demand, now))
            return out

        out.extend(self._idle(now))
        return out

    def _oldest_comms_demand(self) -> Demand | None:
        comms = [
            d
            for d in self.known.values()
            if d.task == Task.COMMS and d is not self.speak_demand
        ]
        return min(comms, key=lambda d: d.discovered_at) if comms else None

    def _choose_demand(self, now: float) -> Demand | None:
        # With the speech modality open, radio traffic is handled by voice and
        # never competes for the hands.
        candidates = [
            d
            for d in self.known.values()
            if not (d.task == Task.COMMS and self.engine.comms.speech_mode)
            and d is not self.speak_demand
        ]
        if not candidates:
            return None
        ranked = sorted(
            candidates,
            key=lambda d: (
                math.ceil(max(d.deadline - now, 0.0) / _URGENCY_BUCKET_S),
                self.layout.walk_time(self.station, d.task),
                d.key,
            ),
        )
        return ranked[0]

    def _pursue(self, demand: Demand, now: float) -> list[OperatorInput]:
        if demand.task != self.station:
            return self._start_walk(demand.task, now)
        n_pending = len(self.known)
        rt = self._sample_rt(demand.task, n_pending)
        self.action = (now + rt, demand)
        return []

    def _sample_rt(self, task: Task, n_pending: int) -> float:
        p = self.profile
        rt = p.base_rt[task.value] * (1.0 + p.rt_inflation * max(0, n_pending - 1))
        if p.rt_sigma_frac > 0:
            rt *= max(0.3, 1.0 + self.rng.normal(0.0, p.rt_sigma_frac))
        return rt

    def _input_for(self, demand: Demand, now: float) -> OperatorInput | None:
        if demand.key[0] == "sysmon":
            return OperatorInput(
                "mouse_click", Task.SYSMON, now, {"target": demand.data["target"]}
            )
        if demand.key[0] == "comms":
            # the task requires a spoken readback alongside the manual tune
            self.readback_until = now + self.profile.readback_s
            return OperatorInput(
                "key_press",
                Task.COMMS,
                now,
                {
                    "target": "radio",
                    "radio": demand.data["radio"],
                    "frequency": demand.data["frequency"],
                },
            )
        if demand.key[0] == "fuel":
            changes = self._pump_changes_needed()
            if not changes:
                self.known.pop(demand.key, None)
                return None
            pid, _ = changes[0]
            if len(changes) == 1:
                self.known.pop(demand.key, None)
            return OperatorInput("mouse_click", Task.RESMAN, now, {"target": "pump", "pump": pid})
        if demand.key[0] == "tracking":
            return self._joystick_input(now)
        return None

    def _start_walk(self, dest: Task, now: float) -> list[OperatorInput]:
        out: list[OperatorInput] = []
        if self.joystick_engaged:
            out.append(
                OperatorInput("joystick_vector", Task.TRACKING, now, {"x": 0.0, "y": 0.0})
            )
            self.joystick_engaged = False
        distance = self.layout.distance(self.station, dest)
        self.walking_to = dest
        self.arrive_at = now + distance / self.profile.walk_speed
        out.append(OperatorInput("move_to_station", dest, now, {"from": self.station.value}))
        return out

    def _idle(self, now: float) -> list[OperatorInput]:
        eng = self.engine
        if not eng.tracking.automatic:
            if self.station != Task.TRACKING:
                return self._start_walk(Task.TRACKING, now)
            if now >= self.next_joystick:
                self.next_joystick = now + self.profile.joystick_period_s
                inp = self._joystick_input(now)
                return [inp] if inp is not None else []
            return []
        if now >= self.next_patrol:
            self.next_patrol = now + self.profile.patrol_interval_s
            idx = _PATROL_CYCLE.index(self.station)
            dest = _PATROL_CYCLE[(idx + 1) % len(_PATROL_CYCLE)]
            return self._start_walk(dest, now)
        return []

    def _joystick_input(self, now: float) -> OperatorInput | None:
        eng = self.engine
        if eng.tracking.automatic:
            return None
        (tx, ty) = eng.tracking.target_pos
        (cx, cy) = eng.tracking.crosshair_center
        # Push the target toward the crosshairs: positive deflection moves it
        # negative along that axis, so aim along (target - center).
        jx = (tx - cx) * self.profile.joystick_kp
        jy = (ty - cy) * self.profile.joystick_kp
        mag = math.hypot(jx, jy)
        if mag > 1.0:
            jx, jy = jx / mag, jy / mag
        self.joystick_engaged = True
        self.next_joystick = max(self.next_joystick, now + self.profile.joystick_period_s)
        return OperatorInput("joystick_vector", Task.TRACKING, now, {"x": jx, "y": jy})

    # ------------------------------------------------------------------
    # Ground truth load and physiology
    # ------------------------------------------------------------------
    @property
    def speaking(self) -> bool:
        if self.speaking_until is not None:
            return True
        return self.engine.clock.elapsed < self.readback_until

    @property
    def walking(self) -> bool:
        return self.walking_to is not None

    def _visible_pending(self, now: float) -> int:
        """Demands currently in view (what the eyes must scan)."""
        eng = self.engine
        count = 0
        for task in self.visible():
            if eng.automation.get(task):
                continue
            if task == Task.SYSMON:
                count += len(eng.sysmon.pending)
            elif task == Task.RESMAN:
                count += int(eng.out_of_range(Task.RESMAN))
            elif task == Task.TRACKING:
                count += int(
                    not eng.tracking.automatic
                    and eng.tracking.error > eng.cfg.engine.tracking.alert_radius
                )
        return count

    def induced_load(self, now: float) -> InducedLoad:
        eng = self.engine
        n_known = len(self.known)
        acting = self.action is not None or self.joystick_engaged
        attending_tracking = (
            self.station == Task.TRACKING
            and not eng.tracking.automatic
            and not self.walking
        )
        n_comms = sum(1 for d in self.known.values() if d.task == Task.COMMS)
        audio = eng.comms.audio_active(now)
        recent_stim = (now - self.last_aud_stim) < 1.5
        # demand tempo over the last 30 s: scanning pressure tracks how fast
        # things have been going out of range, not just the current queue
        arrivals = sum(1 for t in self.recent_visual_demands if now - t <= 30.0)

        def clamp(v: float) -> float:
            return min(max(v, 0.0), 1.0)

        cognitive = clamp(
            0.05
            + 0.12 * n_known
            + 0.05 * min(arrivals, 6)
            + 0.20 * (not eng.tracking.automatic)
            + 0.12 * self.speaking
            + 0.06 * self.walking
        )
        physical = 0.45 if self.walking else (0.25 if acting else 0.05)
        visual = clamp(
            0.06
            + 0.17 * self._visible_pending(now)
            + 0.08 * min(arrivals, 10)
            + 0.25 * attending_tracking
            + 0.15 * acting
        )
        auditory = clamp(
            0.85 * audio
            + 0.30 * recent_stim
            + 0.20 * self.speaking
            + 0.12 * min(n_comms, 3)
        )
        speech = 1.0 if self.speaking else 0.0
        return InducedLoad(cognitive, physical, visual, auditory, speech)

    def physio_step(self, load: InducedLoad, now: float, dt: float) -> PhysioSample:
        return self.synth.step(load, self.speaking, now, dt)
