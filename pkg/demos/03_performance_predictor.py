"""Training and verifying the future-performance predictor.

Builds a training set from a real headless trial, trains a desk-scale
LSTM stack, and runs the finite-difference gradient check that guards the
hand-written backpropagation.
"""
import numpy as np

from matbsim import AdaptationMode, load_config, run_trial
from matbsim.config import PredictorConfig
from matbsim.datasets import predictor_samples
from matbsim.predictor import PerformancePredictor, gradient_check, to_arrays, train

cfg = load_config(overrides={"seed": 11, "script": ["OL", "NL"],
                             "pipeline": {"source": "oracle"}})
log = run_trial(cfg, AdaptationMode.NONE)
samples = predictor_samples(log)
x, y = to_arrays(samples)
print(f"{len(samples)} training samples from a {cfg.total_seconds:.0f}-s trial")
print(f"  each: last three workload estimates (3x6) -> overall performance 60 s ahead")
print(f"  first sample at t={samples[0].t:.0f} s, targets in"
      f" [{y.min():.2f}, {y.max():.2f}]")

pcfg = PredictorConfig(hidden_units=16, dense_units=16, dropout=0.5, epochs=80)
split = int(0.8 * len(x))
model, losses = train(x[:split], y[:split], pcfg, seed=0)
pred = np.clip(model.forward(x[split:]), 0.0, 1.0)
mse = float(np.mean((pred - y[split:]) ** 2))
print(f"\ntrained {pcfg.num_layers} LSTM layers x {pcfg.hidden_units} units:"
      f" loss {losses[0]:.4f} -> {losses[-1]:.4f}, held-out MSE {mse:.4f}")

window = x[-1]
print(f"latest estimate window -> predicted performance {model.predict(window):.3f}"
      f" (actual {y[-1]:.3f})")

small = PerformancePredictor(hidden=2, dense=3, num_layers=3, dropout=0.0, seed=0)
rng = np.random.default_rng(7)
for p in small.params():
    p[:] = rng.uniform(-0.8, 0.8, size=p.shape)
err = gradient_check(small, x[:2], y[:2])
print(f"\ngradient check on a 2-unit model: max relative error {err:.2e} (< 1e-5)")
