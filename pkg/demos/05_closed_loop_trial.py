"""The full staged pipeline at demo scale, ending in a closed-loop comparison.

Stage 1: no-adaptation trials with ground-truth loads calibrate the state
thresholds and train the five component estimators. Stage 2: a trial running
those estimators provides (estimate window -> future performance) pairs for
the predictor. Stage 3: the trained models drive adaptive trials, and the
summary report compares overload-block performance across adaptation modes.

Expect a couple of minutes of compute.
"""
from collections import defaultdict

import numpy as np

from matbsim import AdaptationMode, load_config, run_trial
from matbsim.config import WORKLOAD_COMPONENTS, PredictorConfig
from matbsim.datasets import estimator_rows, predictor_samples
from matbsim.predictor import to_arrays, train
from matbsim.reports import block_overall_means, summarize
from matbsim.trial import TrialModels
from matbsim.workload import calibrate_thresholds, train_component_estimator

SCRIPT = ["OL", "UL", "NL"]  # demo-scale script; the default is the full 7 blocks


def estimates_by_label(log):
    blocks = [(e["t"], e["payload"]["label"]) for e in log.events if e["kind"] == "block"]
    out = defaultdict(list)
    for e in log.of_kind("estimate"):
        for bt, label in blocks:
            if bt < e["t"] <= bt + 450.0:
                out[label].append(e["payload"]["overall"])
    return out


print("stage 1: ground-truth trial, estimator training, threshold calibration")
cfg = load_config(overrides={"seed": 201, "script": SCRIPT, "pipeline": {"source": "oracle"}})
log1 = run_trial(cfg, AdaptationMode.NONE)
feats, labels, _ = estimator_rows(log1)
theta_low, theta_high = calibrate_thresholds(estimates_by_label(log1))
print(f"  thresholds from no-adaptation data: {theta_low:.1f} / {theta_high:.1f}")

estimators = {}
for idx, comp in enumerate(WORKLOAD_COMPONENTS):
    estimators[comp], losses = train_component_estimator(
        (feats, labels[:, idx]), comp, hidden_layers=(32, 32), epochs=200, seed=idx
    )
    print(f"  {comp}: training loss {losses[-1]:.5f}")
pipeline_over = {"theta_low": theta_low, "theta_high": theta_high}

print("\nstage 2: predictor dataset from a trial running the trained estimators")
cfg = load_config(overrides={"seed": 202, "script": SCRIPT, "pipeline": pipeline_over})
log2 = run_trial(cfg, AdaptationMode.NONE, models=TrialModels(estimators=estimators))
x, y = to_arrays(predictor_samples(log2))
predictor, losses = train(
    x, y, PredictorConfig(hidden_units=16, dense_units=16, dropout=0.5, epochs=50), seed=0
)
print(f"  {len(y)} samples, loss {losses[0]:.4f} -> {losses[-1]:.4f}")

print("\nstage 3: closed loop, one seed, all four adaptation modes")
models = TrialModels(estimators=estimators, predictor=predictor)
logs_by_mode = {}
for mode in AdaptationMode:
    cfg = load_config(overrides={"seed": 7, "script": SCRIPT, "pipeline": pipeline_over})
    log3 = run_trial(cfg, mode, models=models)
    logs_by_mode[mode.value] = [log3]
    ol = np.mean(block_overall_means(log3, "OL"))
    actions = sum(1 for e in log3.events if e["kind"] == "action")
    print(f"  {mode.value:12s} OL-block overall={ol:.3f}  adaptation actions={actions}")

print("\nsummary report rows (mode x condition):")
for row in summarize(logs_by_mode):
    print(f"  {row['mode']:12s} {row['condition']}  overall={row['overall_mean']:.3f}"
          f"  sysmon success={row['sysmon_success_pct'] and round(row['sysmon_success_pct'])}%"
          f"  tracking rmse={row['tracking_rmse_mean'] and round(row['tracking_rmse_mean'])}")
