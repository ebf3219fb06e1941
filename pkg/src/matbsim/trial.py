"""Trial orchestration: the perceive-select-act loop over a block script.

One runner drives engine ticks, the operator (synthetic, console session, or
replay injection), physio sampling, the 5-s estimate/prediction/policy
cadence, stimulus delivery, icon updates, and performance sampling, writing
everything into a TrialLog. Replay re-runs the same loop, injecting the
recorded input and physio streams and asserting that every regenerated event
matches the recorded one.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

import numpy as np

from .config import (
    COMPONENT_RANGES,
    WORKLOAD_COMPONENTS,
    ScenarioConfig,
    config_hash,
)
from .engine.conditions import build_condition, schedule_block_events, ScheduledEvent
from .engine.inputs import OperatorInput, input_from_payload
from .engine.world import Engine
from .errors import ConfigError, ReplayDivergence
from .operators import InducedLoad, SyntheticOperator, make_profile
from .policy import (
    AdaptationAction,
    IconState,
    PolicyConfig,
    PolicyState,
    icon_states,
)
from .predictor.model import PerformancePredictor
from .rng import stream
from .scoring import PerformanceSample
from .tasks import ALL_TASKS, Task
from .triallog import LOG_VERSION, TrialLog, canonical_json
from .workload.features import PhysioSample
from .workload.mlp import ComponentEstimator
from .workload.pipeline import WorkloadEstimate, WorkloadPipeline


class AdaptationMode(str, Enum):
    NONE = "none"
    AUTONOMY = "autonomy"
    INTERACTION = "interaction"
    BOTH = "both"

    @property
    def flags(self) -> tuple[bool, bool]:
        """(enable_autonomy, enable_interaction)"""
        return {
            AdaptationMode.NONE: (False, False),
            AdaptationMode.AUTONOMY: (True, False),
            AdaptationMode.INTERACTION: (False, True),
            AdaptationMode.BOTH: (True, True),
        }[self]


@dataclass
class TrialModels:
    estimators: Mapping[str, ComponentEstimator] | None = None
    predictor: PerformancePredictor | None = None


class _LiveSink:
    def __init__(self, log: TrialLog):
        self.trial_log = log

    def log(self, t: float, kind: str, payload: dict) -> None:
        self.trial_log.log(t, kind, payload)


class _ReplaySink:
    """Regenerates the log while asserting event-for-event equality."""

    def __init__(self, header: dict, expected: list[dict]):
        self.trial_log = TrialLog(header=header)
        self.expected = expected
        self.cursor = 0

    def log(self, t: float, kind: str, payload: dict) -> None:
        event = {"t": t, "kind": kind, "payload": payload}
        if self.cursor >= len(self.expected):
            raise ReplayDivergence(self.cursor, {}, event)
        want = self.expected[self.cursor]
        if canonical_json(event) != canonical_json(want):
            raise ReplayDivergence(self.cursor, want, event)
        self.cursor += 1
        self.trial_log.events.append(want)

    def finish(self) -> None:
        if self.cursor != len(self.expected):
            raise ReplayDivergence(
                self.cursor, self.expected[self.cursor], {"kind": "end-of-replay"}
            )


class _ReplayDriver:
    """Injects the recorded input/physio streams (and, without models, the
    recorded estimate/prediction streams) at their original ticks."""

    def __init__(self, log: TrialLog, tick_hz: int, inject_estimates: bool, inject_predictions: bool):
        self.inputs: dict[int, list[dict]] = {}
        self.physio: dict[int, dict] = {}
        self.estimates: dict[int, dict] = {}
        self.predictions: dict[int, float] = {}
        self.inject_estimates = inject_estimates
        self.inject_predictions = inject_predictions
        for event in log.events:
            tick = round(event["t"] * tick_hz)
            kind = event["kind"]
            if kind == "input":
                self.inputs.setdefault(tick, []).append(event["payload"])
            elif kind == "physio":
                self.physio[tick] = event["payload"]
            elif kind == "estimate":
                self.estimates[tick] = event["payload"]
            elif kind == "prediction":
                self.predictions[tick] = event["payload"]["value"]


@dataclass
class ReplayResult:
    log: TrialLog
    events_checked: int
    performance: list[PerformanceSample]


class TrialRunner:
    def __init__(
        self,
        cfg: ScenarioConfig,
        mode: AdaptationMode,
        models: TrialModels | None,
        sink,
        operator=None,
        driver: _ReplayDriver | None = None,
        frame_sink: Callable[[dict], None] | None = None,
        pace_real_time: bool = False,
    ):
        self.cfg = cfg
        self.mode = mode
        self.models = models or TrialModels()
        self.sink = sink
        self.driver = driver
        self.frame_sink = frame_sink
        self.pace_real_time = pace_real_time

        self.engine = Engine(cfg, stream(cfg.seed, "engine"), sink.log)
        self.operator = operator
        enable_autonomy, enable_interaction = mode.flags
        self.policy = PolicyState(
            PolicyConfig.from_data(cfg.policy, enable_autonomy, enable_interaction)
        )
        self.pipeline = WorkloadPipeline(cfg.pipeline, self.models.estimators)
        self.predictor = self.models.predictor

        hz = cfg.engine.tick_hz
        self.physio_every = max(1, round(hz / cfg.pipeline.physio_hz))
        self.estimate_every = max(1, round(cfg.pipeline.cadence_s * hz))
        self.block_ticks = round(cfg.block_seconds * hz)
        self.total_ticks = self.block_ticks * len(cfg.script)
        self.frame_every = max(1, hz // 10)

        self.oracle = cfg.pipeline.source == "oracle"
        maxlen = int(cfg.pipeline.epoch_s * cfg.pipeline.physio_hz) + 4
        self.load_history: deque[tuple[float, InducedLoad]] = deque(maxlen=maxlen)
        self.last_prediction: float | None = None
        self.last_icons: IconState | None = None
        self.performance: list[PerformanceSample] = []

    # ------------------------------------------------------------------
    def run(self) -> None:
        cfg = self.cfg
        engine = self.engine
        hz = cfg.engine.tick_hz
        wall_start = time.monotonic()

        for k in range(1, self.total_ticks + 1):
            if (k - 1) % self.block_ticks == 0:
                self._start_block((k - 1) // self.block_ticks)

            now = (k) / hz
            interactions = engine.advance_tick()

            loads = self.pipeline.latest_loads()
            for plan in self.policy.due_postponed(loads, now):
                self._deliver(plan, now)
            for inter in interactions:
                for plan in self.policy.plan_interaction(inter.uid, inter.task, loads, now):
                    self._deliver(plan, now)

            if self.driver is not None:
                for payload in self.driver.inputs.get(k, ()):
                    engine.apply_input(input_from_payload(now, payload))
            elif self.operator is not None:
                for inp in self.operator.step(now, engine.clock.tick_seconds):
                    engine.apply_input(inp)

            if k % self.physio_every == 0:
                self._physio_tick(k, now)

            if k % self.estimate_every == 0:
                self._estimate_tick(k, now)

            self._icon_tick(now)

            if self.frame_sink is not None and k % self.frame_every == 0:
                self.frame_sink(engine, self.last_icons, k)

            if self.pace_real_time:
                while getattr(self.operator, "paused", False):
                    time.sleep(0.05)
                    wall_start += 0.05
                lag = (k / hz) - (time.monotonic() - wall_start)
                if lag > 0:
                    time.sleep(lag)

        self.sink.log(self.total_ticks / hz, "end", {"ticks": self.total_ticks})

    # ------------------------------------------------------------------
    def _start_block(self, index: int) -> None:
        label = self.cfg.script[index]
        condition = build_condition(label, self.cfg.conditions)
        offset = index * self.cfg.block_seconds
        events = [
            ScheduledEvent(e.t + offset, e.kind, e.payload)
            for e in schedule_block_events(
                condition, self.cfg.block_seconds, self.engine.rng, self.cfg.engine.comms
            )
        ]
        interactions = self.engine.start_block(label, condition, events)
        now = self.engine.clock.elapsed
        loads = self.pipeline.latest_loads()
        for inter in interactions:
            for plan in self.policy.plan_interaction(inter.uid, inter.task, loads, now):
                self._deliver(plan, now)

    def _deliver(self, plan, now: float) -> None:
        self.sink.log(now, "stimulus", plan.to_payload())
        if self.operator is not None and hasattr(self.operator, "notify_stimulus"):
            self.operator.notify_stimulus(plan, now)

    def _physio_tick(self, k: int, now: float) -> None:
        if self.driver is not None:
            payload = self.driver.physio.get(k)
            if payload is None:
                return
            sample = PhysioSample.from_payload(now, payload)
            self.pipeline.add_sample(sample)
            if "load" in payload:
                self.load_history.append((now, InducedLoad(**payload["load"])))
            self.sink.log(now, "physio", payload)
            return
        if self.operator is None:
            return
        dt = self.physio_every / self.cfg.engine.tick_hz
        load = self.operator.induced_load(now)
        sample = self.operator.physio_step(load, now, dt)
        self.pipeline.add_sample(sample)
        self.load_history.append((now, load))
        payload = sample.to_payload()
        if getattr(self.operator, "provides_ground_truth", True):
            payload["load"] = load.as_dict()
        self.sink.log(now, "physio", payload)

    def _estimate_tick(self, k: int, now: float) -> None:
        active = sorted(self.engine.active_tasks())
        estimate = self._make_estimate(k, now, active)
        if estimate is not None:
            self.sink.log(now, "estimate", estimate.to_payload())

        prediction = self._make_prediction(k)
        if prediction is not None:
            self.sink.log(now, "prediction", {"value": prediction})
        self.last_prediction = prediction

        decision, targets, gate_changed = self.policy.policy_tick(
            self.pipeline.state_history(self.policy.config.hysteresis_len),
            prediction,
            active,
            self.pipeline.latest_loads(),
        )
        if gate_changed:
            self.engine.comms.speech_mode = self.policy.speech_mode
            self.sink.log(now, "gate", {"speech_mode": self.policy.speech_mode})
        if decision.action != AdaptationAction.NO_CHANGE:
            self.sink.log(
                now,
                "action",
                {
                    "action": decision.action.value,
                    "trigger": decision.trigger,
                    "targets": [t.value for t in targets],
                },
            )
            automate = decision.action == AdaptationAction.AUTOMATE_INACTIVE
            loads = self.pipeline.latest_loads()
            for task in targets:
                for inter in self.engine.set_task_automation(task, automate):
                    for plan in self.policy.plan_interaction(inter.uid, inter.task, loads, now):
                        self._deliver(plan, now)

        if now >= self.cfg.scoring.perf_window_s - 1e-9:
            sample = self.engine.performance_sample(now)
            self.performance.append(sample)
            self.sink.log(now, "perf", sample.to_payload())

    def _make_estimate(self, k: int, now: float, active) -> WorkloadEstimate | None:
        if self.driver is not None and self.driver.inject_estimates:
            payload = self.driver.estimates.get(k)
            if payload is None:
                return None
            estimate = WorkloadEstimate.from_payload(now, payload)
            self.pipeline.record(estimate)
            return estimate
        if self.oracle:
            if now < self.cfg.pipeline.epoch_s - 1e-9 or not self.load_history:
                return None
            start = now - self.cfg.pipeline.epoch_s
            window = [ld for (t, ld) in self.load_history if t > start]
            means = {
                name: sum(getattr(ld, name) for ld in window) / len(window)
                for name in WORKLOAD_COMPONENTS
            }
            return self.pipeline.assemble_from_loads(now, means)
        if self.models.estimators is None:
            return None
        return self.pipeline.estimate_tick(now, active)

    def _make_prediction(self, k: int) -> float | None:
        if self.driver is not None and self.driver.inject_predictions:
            return self.driver.predictions.get(k)
        if self.predictor is None or len(self.pipeline.history) < 3:
            return None
        window = np.array([e.input_row() for e in self.pipeline.history[-3:]])
        return self.predictor.predict(window)

    def _current_icons(self) -> IconState:
        return icon_states(
            self.engine.automation,
            {t: self.engine.out_of_range(t) for t in ALL_TASKS},
            self.policy.visual_overloaded,
            self.policy.speech_mode,
        )

    def _icon_tick(self, now: float) -> None:
        icons = self._current_icons()
        if icons != self.last_icons:
            self.last_icons = icons
            self.sink.log(now, "icons", icons.to_payload())


def _make_header(cfg: ScenarioConfig, mode: AdaptationMode, operator: str) -> dict:
    return {
        "version": LOG_VERSION,
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "mode": mode.value,
        "operator": operator,
    }


def run_trial(
    cfg: ScenarioConfig,
    mode: AdaptationMode,
    models: TrialModels | None = None,
    operator_factory: Callable[[Engine, np.random.Generator], object] | None = None,
    log_path=None,
    frame_sink: Callable[[dict], None] | None = None,
    pace_real_time: bool = False,
) -> TrialLog:
    """Execute one full trial and return (optionally also write) its log."""
    log = TrialLog(header={})
    sink = _LiveSink(log)
    runner = TrialRunner(cfg, mode, models, sink, frame_sink=frame_sink,
                         pace_real_time=pace_real_time)
    if operator_factory is not None:
        runner.operator = operator_factory(runner.engine, stream(cfg.seed, "operator"))
        operator_name = getattr(runner.operator, "kind", "custom")
    else:
        profile = make_profile(cfg.operator.profile, cfg.operator.overrides)
        runner.operator = SyntheticOperator(
            profile, runner.engine, stream(cfg.seed, "operator")
        )
        operator_name = f"synthetic:{profile.name}"
    log.header.update(_make_header(cfg, mode, operator_name))
    runner.run()
    if log_path is not None:
        log.write(log_path)
    return log


def replay(log: TrialLog, models: TrialModels | None = None) -> ReplayResult:
    """Re-simulate a trial from its header seed plus recorded input streams.

    Every regenerated event is compared to the recorded one; the first
    mismatch raises ReplayDivergence naming the event. Without models, the
    recorded estimate/prediction streams are injected and everything
    downstream of them is recomputed.
    """
    from .config import load_config

    cfg = load_config(overrides=log.header["config"])
    mode = AdaptationMode(log.header["mode"])
    sink = _ReplaySink(dict(log.header), log.events)
    oracle = cfg.pipeline.source == "oracle"
    driver = _ReplayDriver(
        log,
        cfg.engine.tick_hz,
        inject_estimates=(not oracle) and (models is None or models.estimators is None),
        inject_predictions=models is None or models.predictor is None,
    )
    runner = TrialRunner(cfg, mode, models, sink, driver=driver)
    runner.run()
    sink.finish()
    return ReplayResult(
        log=sink.trial_log,
        events_checked=sink.cursor,
        performance=runner.performance,
    )
