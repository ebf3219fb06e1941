"""Select/Act policy: autonomy truth table, hysteresis, modality, icons."""
from __future__ import annotations

from itertools import product

import pytest

from matbsim.policy import (
    AdaptationAction,
    PolicyConfig,
    PolicyState,
    autonomy_decision,
    icon_states,
    resolve_postponed,
    select_modality,
    speech_modality_gate,
)
from matbsim.tasks import ALL_TASKS, Task

ENABLED = PolicyConfig(enable_autonomy=True, enable_interaction=True)


def truth_table_reference(history, pred):
    """Hand-written encoding of the autonomy rules + precedence."""
    if all(s == "OL" for s in history):
        return AdaptationAction.AUTOMATE_INACTIVE
    if all(s == "UL" for s in history):
        return AdaptationAction.DEAUTOMATE_ALL
    if pred < 0.70:
        return AdaptationAction.AUTOMATE_INACTIVE
    if pred > 0.85:
        return AdaptationAction.DEAUTOMATE_ALL
    return AdaptationAction.NO_CHANGE


class TestAutonomyDecision:
    def test_low_prediction_automates(self):
        d = autonomy_decision(["NL", "NL", "NL"], 0.65, ENABLED)
        assert d.action == AdaptationAction.AUTOMATE_INACTIVE
        assert d.trigger == "perf_low"

    def test_ul_streak_deautomates_despite_ok_prediction(self):
        d = autonomy_decision(["UL", "UL", "UL"], 0.75, ENABLED)
        assert d.action == AdaptationAction.DEAUTOMATE_ALL
        assert d.trigger == "ul_streak"

    def test_broken_streak_no_change(self):
        d = autonomy_decision(["OL", "NL", "OL"], 0.75, ENABLED)
        assert d.action == AdaptationAction.NO_CHANGE

    def test_workload_trigger_beats_performance_trigger(self):
        # conflict: sustained overload vs high predicted performance
        d = autonomy_decision(["OL", "OL", "OL"], 0.9, ENABLED)
        assert d.action == AdaptationAction.AUTOMATE_INACTIVE
        assert d.trigger == "ol_streak"
        d = autonomy_decision(["UL", "UL", "UL"], 0.6, ENABLED)
        assert d.action == AdaptationAction.DEAUTOMATE_ALL
        assert d.trigger == "ul_streak"

    def test_thresholds_are_strict_inequalities(self):
        assert autonomy_decision(["NL"] * 3, 0.70, ENABLED).action == AdaptationAction.NO_CHANGE
        assert autonomy_decision(["NL"] * 3, 0.85, ENABLED).action == AdaptationAction.NO_CHANGE

    def test_missing_prediction_skips_performance_triggers(self):
        assert autonomy_decision(["NL"] * 3, None, ENABLED).action == AdaptationAction.NO_CHANGE
        assert (
            autonomy_decision(["OL"] * 3, None, ENABLED).action
            == AdaptationAction.AUTOMATE_INACTIVE
        )

    def test_exhaustive_truth_table(self):
        # all 27 three-state histories x three prediction levels
        for history in product(("UL", "NL", "OL"), repeat=3):
            for pred in (0.6, 0.75, 0.9):
                got = autonomy_decision(list(history), pred, ENABLED).action
                assert got == truth_table_reference(history, pred), (history, pred)


class TestPolicyTickLatch:
    def _state(self):
        return PolicyState(ENABLED)

    def test_cold_start_no_change(self):
        st = self._state()
        decision, targets, _ = st.policy_tick(["OL", "OL"], 0.5, [Task.COMMS], None)
        assert decision.action == AdaptationAction.NO_CHANGE

    def test_sustained_overload_emits_exactly_once(self):
        st = self._state()
        emissions = 0
        history = []
        for _ in range(20):
            history.append("OL")
            decision, targets, _ = st.policy_tick(history[-3:], 0.75, [Task.COMMS], None)
            if decision.action != AdaptationAction.NO_CHANGE:
                emissions += 1
                assert set(targets) == set(ALL_TASKS) - {Task.COMMS}
        assert emissions == 1

    def test_alternating_stream_never_toggles(self):
        st = self._state()
        states = ["OL", "NL"] * 500
        toggles = 0
        for i in range(3, len(states)):
            decision, _, _ = st.policy_tick(states[i - 3 : i], 0.75, [Task.COMMS], None)
            if decision.action != AdaptationAction.NO_CHANGE:
                toggles += 1
        assert toggles == 0

    def test_retrigger_after_reset(self):
        st = self._state()
        seq = ["OL"] * 5 + ["NL"] * 3 + ["OL"] * 5
        actions = []
        for i in range(3, len(seq) + 1):
            decision, _, _ = st.policy_tick(seq[i - 3 : i], 0.75, [Task.COMMS], None)
            if decision.action != AdaptationAction.NO_CHANGE:
                actions.append(decision.action)
        assert actions == [AdaptationAction.AUTOMATE_INACTIVE] * 2

    def test_disabled_policy_never_acts(self):
        st = PolicyState(PolicyConfig(enable_autonomy=False, enable_interaction=False))
        decision, _, _ = st.policy_tick(["OL"] * 3, 0.1, [Task.COMMS], None)
        assert decision.action == AdaptationAction.NO_CHANGE

    def test_automate_targets_complement_of_active(self):
        st = self._state()
        _, targets, _ = st.policy_tick(
            ["OL"] * 3, 0.75, [Task.TRACKING, Task.SYSMON], None
        )
        assert set(targets) == {Task.RESMAN, Task.COMMS}


UNLOADED = {c: "unloaded" for c in ("cognitive", "physical", "visual", "auditory", "speech")}


class TestModalitySelection:
    def test_clear_channels_visual_plus_auditory(self):
        plans = select_modality(UNLOADED, 1, Task.SYSMON, now=100.0)
        stimuli = {(p.stimulus, p.deliver_at) for p in plans}
        assert stimuli == {("visual", 100.0), ("auditory", 100.0)}

    def test_speech_loaded_postpones_auditory(self):
        loads = dict(UNLOADED, speech="loaded")
        plans = select_modality(loads, 2, Task.SYSMON, now=100.0, postpone_s=5.0)
        auditory = [p for p in plans if p.stimulus == "auditory"]
        assert len(auditory) == 1
        assert auditory[0].postponed
        assert auditory[0].deliver_at == 105.0

    def test_visual_overloaded_suppresses_visual(self):
        loads = dict(UNLOADED, visual="overloaded")
        plans = select_modality(loads, 3, Task.RESMAN, now=10.0)
        assert all(p.stimulus != "visual" for p in plans)

    def test_postponed_clears_to_auditory(self):
        loads = dict(UNLOADED, auditory="loaded")
        plan = select_modality(loads, 4, Task.SYSMON, now=0.0)[-1]
        resolved = resolve_postponed(plan, UNLOADED, now=5.0)
        assert resolved.stimulus == "auditory"
        assert resolved.deliver_at == 5.0

    def test_postponed_still_blocked_falls_back_visual_only(self):
        loads = dict(UNLOADED, auditory="loaded")
        plan = select_modality(loads, 5, Task.SYSMON, now=0.0)[-1]
        resolved = resolve_postponed(plan, loads, now=5.0)
        assert resolved.stimulus == "visual_only_fallback"


class TestIconStates:
    def _maps(self, **kwargs):
        automation = {t: False for t in ALL_TASKS}
        oor = {t: False for t in ALL_TASKS}
        automation.update(kwargs.get("automation", {}))
        oor.update(kwargs.get("oor", {}))
        return automation, oor

    def test_automated_is_green(self):
        automation, oor = self._maps(automation={Task.SYSMON: True})
        icons = icon_states(automation, oor, False, False)
        assert icons.left[Task.SYSMON] == "green"

    def test_out_of_range_is_red(self):
        automation, oor = self._maps(oor={Task.RESMAN: True})
        icons = icon_states(automation, oor, False, False)
        assert icons.left[Task.RESMAN] == "red"

    def test_visual_overload_greys_non_automated(self):
        automation, oor = self._maps(
            automation={Task.SYSMON: True}, oor={Task.RESMAN: True}
        )
        icons = icon_states(automation, oor, True, False)
        assert icons.left[Task.RESMAN] == "grey"   # out of range but suppressed
        assert icons.left[Task.SYSMON] == "green"  # automation still shown

    def test_nominal_is_grey(self):
        automation, oor = self._maps()
        icons = icon_states(automation, oor, False, False)
        assert set(icons.left.values()) == {"grey"}

    def test_stateless(self):
        automation, oor = self._maps(oor={Task.COMMS: True})
        a = icon_states(automation, oor, False, True)
        b = icon_states(automation, oor, False, True)
        assert a == b


class TestSpeechGate:
    def test_interaction_disabled_always_false(self):
        assert speech_modality_gate(UNLOADED, False) is False

    def test_unloaded_channel_enables(self):
        assert speech_modality_gate(UNLOADED, True) is True

    def test_overloaded_speech_disables(self):
        loads = dict(UNLOADED, speech="overloaded")
        assert speech_modality_gate(loads, True) is False

    def test_no_estimate_yet_disables(self):
        assert speech_modality_gate(None, True) is False

    def test_gate_never_toggles_while_loads_stable(self):
        st = PolicyState(ENABLED)
        changed = st.update_speech_gate(UNLOADED)
        assert changed  # off -> on at first estimate
        for _ in range(100):
            assert not st.update_speech_gate(UNLOADED)
