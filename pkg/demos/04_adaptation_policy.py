"""Select/Act decisions on synthetic inputs.

Walks the autonomy rules through a workload-state timeline, then shows the
modality arbitration postponing an auditory stimulus and falling back to
visual-only when the speech channel stays loaded.
"""
from matbsim.policy import (
    AdaptationAction,
    PolicyConfig,
    PolicyState,
    icon_states,
    resolve_postponed,
    select_modality,
)
from matbsim.tasks import ALL_TASKS, Task

cfg = PolicyConfig(enable_autonomy=True, enable_interaction=True)
policy = PolicyState(cfg)

timeline = ["NL", "NL", "OL", "OL", "OL", "OL", "NL", "UL", "UL", "UL", "NL"]
predictions = [0.8, 0.8, 0.78, 0.74, 0.72, 0.71, 0.75, 0.82, 0.86, 0.9, 0.8]
print("estimate stream -> autonomy decisions (three-estimate hysteresis):")
history: list[str] = []
for i, (state, pred) in enumerate(zip(timeline, predictions)):
    history.append(state)
    decision, targets, _ = policy.policy_tick(
        history[-3:], pred, [Task.TRACKING, Task.SYSMON], None
    )
    mark = "" if decision.action == AdaptationAction.NO_CHANGE else (
        f"  -> {decision.action.value} ({decision.trigger}) targets={[t.value for t in targets]}"
    )
    print(f"  t={5 * i:3d}s  state={state}  pred={pred:.2f}{mark}")

print("\nmodality arbitration for a system-monitoring alert at t=100:")
loads = {"cognitive": "loaded", "physical": "unloaded", "visual": "loaded",
         "auditory": "unloaded", "speech": "loaded"}
plans = select_modality(loads, interaction_uid=9, task=Task.SYSMON, now=100.0)
for plan in plans:
    kind = "postponed" if plan.postponed else "deliver"
    print(f"  {kind} {plan.stimulus} at t={plan.deliver_at:.0f}")
postponed = next(p for p in plans if p.postponed)
resolved = resolve_postponed(postponed, loads, now=105.0)
print(f"  at the deadline, speech still loaded -> {resolved.stimulus}")

print("\nicon computation (stateless):")
automation = {t: t == Task.RESMAN for t in ALL_TASKS}
oor = {t: t == Task.SYSMON for t in ALL_TASKS}
for overload in (False, True):
    icons = icon_states(automation, oor, visual_overloaded=overload, speech_mode=True)
    print(f"  visual overloaded={overload}: "
          + ", ".join(f"{t.value}={c}" for t, c in sorted(icons.left.items())))
