"""Select/Act stage: autonomy decisions, interaction-modality arbitration,
icon states, and the speech-modality gate.

Autonomy changes require either a performance-threshold crossing or three
consecutive same-class workload states; the workload-state trigger wins when
the two disagree. A no-repeat latch suppresses duplicate actions while the
triggering state persists, so a sustained overload produces exactly one
automation command rather than one per estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .config import PolicyConfigData
from .tasks import ALL_TASKS, Task


class AdaptationAction(str, Enum):
    AUTOMATE_INACTIVE = "automate_inactive"
    DEAUTOMATE_ALL = "deautomate_all"
    NO_CHANGE = "no_change"


@dataclass(frozen=True)
class PolicyConfig:
    perf_low: float = 0.70
    perf_high: float = 0.85
    hysteresis_len: int = 3
    postpone_s: float = 5.0
    enable_autonomy: bool = False
    enable_interaction: bool = False

    def __post_init__(self) -> None:
        if self.perf_low >= self.perf_high:
            raise ValueError("perf_low must be < perf_high")
        if self.hysteresis_len < 1:
            raise ValueError("hysteresis_len must be >= 1")

    @classmethod
    def from_data(
        cls, data: PolicyConfigData, enable_autonomy: bool, enable_interaction: bool
    ) -> "PolicyConfig":
        return cls(
            perf_low=data.perf_low,
            perf_high=data.perf_high,
            hysteresis_len=data.hysteresis_len,
            postpone_s=data.postpone_s,
            enable_autonomy=enable_autonomy,
            enable_interaction=enable_interaction,
        )


@dataclass(frozen=True)
class Decision:
    action: AdaptationAction
    trigger: str | None = None      # perf_low | perf_high | ol_streak | ul_streak


def autonomy_decision(
    state_history: Sequence[str],
    predicted_perf: float | None,
    config: PolicyConfig,
) -> Decision:
    """One Select-stage autonomy decision.

    Automate the inactive tasks when predicted performance falls below the
    lower threshold or the recent workload states are all overload;
    de-automate everything when prediction exceeds the upper threshold or the
    recent states are all underload. Workload-state triggers take precedence
    over performance triggers.
    """
    h = config.hysteresis_len
    recent = list(state_history[-h:])
    streak = len(recent) == h
    if streak and all(s == "OL" for s in recent):
        return Decision(AdaptationAction.AUTOMATE_INACTIVE, "ol_streak")
    if streak and all(s == "UL" for s in recent):
        return Decision(AdaptationAction.DEAUTOMATE_ALL, "ul_streak")
    if predicted_perf is not None:
        if predicted_perf < config.perf_low:
            return Decision(AdaptationAction.AUTOMATE_INACTIVE, "perf_low")
        if predicted_perf > config.perf_high:
            return Decision(AdaptationAction.DEAUTOMATE_ALL, "perf_high")
    return Decision(AdaptationAction.NO_CHANGE)


@dataclass(frozen=True)
class InteractionPlan:
    stimulus: str                   # visual | auditory | visual_only_fallback
    deliver_at: float
    interaction_uid: int
    task: Task
    postponed: bool = False

    def to_payload(self) -> dict:
        return {
            "stimulus": self.stimulus,
            "deliver_at": self.deliver_at,
            "interaction": self.interaction_uid,
            "task": self.task.value,
            "postponed": self.postponed,
        }


def select_modality(
    loads: Mapping[str, str],
    interaction_uid: int,
    task: Task,
    now: float,
    postpone_s: float = 5.0,
) -> list[InteractionPlan]:
    """Choose stimulus modalities for a pending interaction.

    Visual is included unless the visual channel is overloaded. Auditory is
    included only while both the speech and auditory channels are unloaded;
    otherwise the auditory decision is postponed once, re-checked at the
    deadline, and degrades to a visual-only fallback if still blocked.
    """
    plans: list[InteractionPlan] = []
    if loads.get("visual") != "overloaded":
        plans.append(InteractionPlan("visual", now, interaction_uid, task))
    if loads.get("speech") == "unloaded" and loads.get("auditory") == "unloaded":
        plans.append(InteractionPlan("auditory", now, interaction_uid, task))
    else:
        plans.append(
            InteractionPlan("auditory", now + postpone_s, interaction_uid, task, postponed=True)
        )
    return plans


def resolve_postponed(
    plan: InteractionPlan, loads: Mapping[str, str], now: float
) -> InteractionPlan:
    """At the postponement deadline: deliver auditory if the channels cleared,
    else fall back to a visual-only stimulus."""
    if loads.get("speech") == "unloaded" and loads.get("auditory") == "unloaded":
        return InteractionPlan("auditory", now, plan.interaction_uid, plan.task)
    return InteractionPlan("visual_only_fallback", now, plan.interaction_uid, plan.task)


@dataclass(frozen=True)
class IconState:
    left: dict[Task, str]           # green | red | grey per task
    speech_available: bool

    def to_payload(self) -> dict:
        return {
            "left": {t.value: c for t, c in sorted(self.left.items())},
            "speech_available": self.speech_available,
        }


def icon_states(
    automation: Mapping[Task, bool],
    out_of_range: Mapping[Task, bool],
    visual_overloaded: bool,
    speech_mode: bool,
) -> IconState:
    """Stateless icon computation: green when automated, red when out of
    range, grey otherwise; visual overload greys every non-automated task."""
    left: dict[Task, str] = {}
    for task in ALL_TASKS:
        if automation[task]:
            left[task] = "green"
        elif visual_overloaded:
            left[task] = "grey"
        elif out_of_range[task]:
            left[task] = "red"
        else:
            left[task] = "grey"
    return IconState(left=left, speech_available=speech_mode)


def speech_modality_gate(loads: Mapping[str, str] | None, enable_interaction: bool) -> bool:
    """Speech responses to the communications task are available while
    interaction adaptation is on and the speech channel is not overloaded."""
    if not enable_interaction:
        return False
    if loads is None:
        return False                # no estimate yet
    return loads.get("speech") != "overloaded"


@dataclass
class PolicyState:
    """Single owner of decision history and no-repeat latches."""

    config: PolicyConfig
    last_action: AdaptationAction = AdaptationAction.NO_CHANGE
    speech_mode: bool = False
    visual_overloaded: bool = False
    postponed: list[InteractionPlan] = field(default_factory=list)

    def policy_tick(
        self,
        state_history: Sequence[str],
        predicted_perf: float | None,
        active: Iterable[Task],
        loads: Mapping[str, str] | None,
    ) -> tuple[Decision, list[Task], bool]:
        """Autonomy decision at estimate cadence.

        Returns (decision, tasks to automate, speech-gate state). The decision
        comes back NO_CHANGE while disabled, during cold start, or while its
        trigger state is unchanged since the last emission.
        """
        gate_changed = self.update_speech_gate(loads)
        if loads is not None:
            self.visual_overloaded = loads.get("visual") == "overloaded"

        if not self.config.enable_autonomy or len(state_history) < self.config.hysteresis_len:
            decision = Decision(AdaptationAction.NO_CHANGE)
            self.last_action = decision.action
            return decision, [], gate_changed

        decision = autonomy_decision(state_history, predicted_perf, self.config)
        if decision.action == self.last_action:
            self.last_action = decision.action
            return Decision(AdaptationAction.NO_CHANGE), [], gate_changed
        self.last_action = decision.action

        targets: list[Task] = []
        if decision.action == AdaptationAction.AUTOMATE_INACTIVE:
            targets = [t for t in ALL_TASKS if t not in set(active)]
        elif decision.action == AdaptationAction.DEAUTOMATE_ALL:
            targets = list(ALL_TASKS)
        return decision, targets, gate_changed

    def update_speech_gate(self, loads: Mapping[str, str] | None) -> bool:
        """Re-evaluate the speech gate; True when it toggled."""
        new = speech_modality_gate(loads, self.config.enable_interaction)
        changed = new != self.speech_mode
        self.speech_mode = new
        return changed

    def plan_interaction(
        self, interaction_uid: int, task: Task, loads: Mapping[str, str] | None, now: float
    ) -> list[InteractionPlan]:
        """Modality plans for a newly pending interaction (empty while
        interaction adaptation is off)."""
        if not self.config.enable_interaction:
            return []
        loads = loads or {}
        plans = select_modality(loads, interaction_uid, task, now, self.config.postpone_s)
        immediate = [p for p in plans if not p.postponed]
        self.postponed.extend(p for p in plans if p.postponed)
        return immediate

    def due_postponed(
        self, loads: Mapping[str, str] | None, now: float
    ) -> list[InteractionPlan]:
        """Resolve postponed auditory plans whose deadline has arrived."""
        due = [p for p in self.postponed if p.deliver_at <= now]
        if not due:
            return []
        self.postponed = [p for p in self.postponed if p.deliver_at > now]
        return [resolve_postponed(p, loads or {}, now) for p in due]
