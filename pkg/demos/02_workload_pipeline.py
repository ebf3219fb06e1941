"""The perceive stage in isolation.

Synthesizes a physiological stream whose induced load steps from idle to
frantic halfway through, extracts 30-s epoch features, and shows how the
estimates and the three-way state classification respond.
"""
import numpy as np

from matbsim.config import PipelineConfig, load_config
from matbsim.operators import InducedLoad, PhysioSynth, make_profile
from matbsim.tasks import Task
from matbsim.workload import (
    WorkloadPipeline,
    classify_state,
    contextual_features,
    ContextTable,
    extract_features,
)
from matbsim.workload.mlp import train_component_estimator

rng = np.random.default_rng(0)
profile = make_profile("nominal")
synth = PhysioSynth(profile, rng)

low = InducedLoad(0.08, 0.05, 0.1, 0.05, 0.0)
high = InducedLoad(0.85, 0.3, 0.8, 0.6, 0.0)

samples = []
for k in range(1, 241):  # 120 s at 2 Hz
    t = k * 0.5
    load = low if t <= 60 else high
    samples.append(synth.step(load, speaking=False, now=t, dt=0.5))

feats_low = extract_features(samples[:61], 30.0)
feats_high = extract_features(samples[-61:], 30.0)
print("epoch features respond to the load step (heart-rate channel):")
print(f"  calm  epoch: mean={feats_low[0]:.1f} bpm, slope={feats_low[3]:+.3f} bpm/s")
print(f"  loaded epoch: mean={feats_high[0]:.1f} bpm, slope={feats_high[3]:+.3f} bpm/s")

table = ContextTable.from_config(PipelineConfig())
ctx = contextual_features([Task.TRACKING, Task.SYSMON], table)
print(f"\ncontextual features for {{tracking, sysmon}}: {np.round(ctx, 1)}")
print("  (per-component nominal loads of the active task set)")

# train a toy cognitive estimator on labels derived from the step itself
xs, ys = [], []
for k in range(61, 241):
    window = samples[k - 61 : k]
    t = window[-1].t
    stats = extract_features(window, 30.0)
    xs.append(np.concatenate([stats, ctx]))
    frac = np.mean([low.cognitive if s.t <= 60 else high.cognitive for s in window])
    ys.append(frac * 22.0)
est, losses = train_component_estimator(
    (np.array(xs), np.array(ys)), "cognitive", hidden_layers=(16,), epochs=200, seed=1
)
print(f"\ncognitive estimator trained on the step: loss {losses[0]:.3f} -> {losses[-1]:.4f}")
print(f"  estimate during calm half:   {est.estimate(xs[10]):5.1f} / 22")
print(f"  estimate during loaded half: {est.estimate(xs[-10]):5.1f} / 22")

for overall in (8.0, 25.0, 45.0):
    print(f"overall workload {overall:4.1f}  ->  state {classify_state(overall, 19.21, 36.345)}")
