"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The closed-loop criteria share one session-scoped model pipeline: two
no-adaptation ground-truth trials calibrate the state thresholds and train
the five component estimators; two more no-adaptation trials (now running
the trained estimators) provide the predictor's training set; the resulting
models drive the adaptive closed-loop comparison.
"""
from __future__ import annotations

import math
from collections import defaultdict
from itertools import product

import numpy as np
import pytest

from matbsim import AdaptationMode, load_config, replay, run_trial
from matbsim.config import COMPONENT_RANGES, WORKLOAD_COMPONENTS, PredictorConfig
from matbsim.datasets import estimator_rows, predictor_samples
from matbsim.engine.conditions import build_condition, schedule_block_events
from matbsim.policy import (
    AdaptationAction,
    PolicyConfig,
    PolicyState,
    autonomy_decision,
    resolve_postponed,
    select_modality,
)
from matbsim.predictor.dataset import to_arrays
from matbsim.predictor.model import PerformancePredictor, gradient_check, train
from matbsim.reports import block_overall_means
from matbsim.scoring import PerformanceWindow, Closure, fuel_score, windowed_performance
from matbsim.tasks import Task
from matbsim.trial import TrialModels
from matbsim.workload.features import channel_statistics
from matbsim.workload.mlp import train_component_estimator
from matbsim.workload.pipeline import calibrate_thresholds

from test_trial import oracle_performance


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f": {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def _estimates_by_label(log):
    blocks = [(e["t"], e["payload"]["label"]) for e in log.events if e["kind"] == "block"]
    out = defaultdict(list)
    for e in log.of_kind("estimate"):
        for bt, label in blocks:
            if bt < e["t"] <= bt + 450.0:
                out[label].append(e["payload"]["overall"])
    return out


def _majority(log) -> dict[str, float]:
    blocks = [(e["t"], e["payload"]["label"]) for e in log.events if e["kind"] == "block"]
    ests = [(e["t"], e["payload"]["state"]) for e in log.events if e["kind"] == "estimate"]
    out = {}
    for want in ("UL", "OL"):
        hits = total = 0
        for bt, label in blocks:
            if label != want:
                continue
            states = [s for (t, s) in ests if bt < t <= bt + 450.0]
            hits += sum(1 for s in states if s == want)
            total += len(states)
        out[want] = hits / total if total else 0.0
    return out


@pytest.fixture(scope="session")
def trained():
    """Stage the full training pipeline once for the closed-loop criteria."""
    feats_list, labels_list = [], []
    by_label = defaultdict(list)
    for seed in (101, 102):
        cfg = load_config(overrides={"seed": seed, "pipeline": {"source": "oracle"}})
        log = run_trial(cfg, AdaptationMode.NONE)
        f, l, _ = estimator_rows(log)
        feats_list.append(f)
        labels_list.append(l)
        for k, v in _estimates_by_label(log).items():
            by_label[k].extend(v)
    feats, labels = np.vstack(feats_list), np.vstack(labels_list)
    theta_low, theta_high = calibrate_thresholds(by_label)
    pipeline_over = {"theta_low": theta_low, "theta_high": theta_high}

    estimators = {}
    for idx, comp in enumerate(WORKLOAD_COMPONENTS):
        estimators[comp], _ = train_component_estimator(
            (feats, labels[:, idx]), comp, hidden_layers=(32, 32), epochs=300, seed=idx
        )

    # held-out ground-truth trial for the MAE criterion
    cfg = load_config(overrides={"seed": 103, "pipeline": {"source": "oracle", **pipeline_over}})
    held_log = run_trial(cfg, AdaptationMode.NONE)
    held_feats, held_labels, _ = estimator_rows(held_log)

    # no-adaptation trials with the trained estimators in the loop
    models = TrialModels(estimators=estimators)
    samples = []
    trained_logs = []
    for seed in (104, 105):
        cfg = load_config(overrides={"seed": seed, "pipeline": pipeline_over})
        log = run_trial(cfg, AdaptationMode.NONE, models=models)
        trained_logs.append(log)
        samples.extend(predictor_samples(log))
    x, y = to_arrays(samples)
    predictor, _ = train(
        x, y,
        PredictorConfig(hidden_units=16, dense_units=16, dropout=0.5, epochs=60),
        seed=0,
    )
    return {
        "estimators": estimators,
        "predictor": predictor,
        "models": TrialModels(estimators=estimators, predictor=predictor),
        "pipeline_over": pipeline_over,
        "held_feats": held_feats,
        "held_labels": held_labels,
        "trained_logs": trained_logs,
    }


class TestConditionFidelity:
    def test_block_event_counts_exact(self):
        rng = np.random.default_rng(0)
        ol = schedule_block_events(build_condition("OL"), 450.0, rng)
        ul = schedule_block_events(build_condition("UL"), 450.0, np.random.default_rng(1))
        ol_sysmon = sum(1 for e in ol if e.kind == "sysmon")
        ul_sysmon = sum(1 for e in ul if e.kind == "sysmon")
        ul_pumps = sum(1 for e in ul if e.kind == "pump_failure")
        ok = ol_sysmon == 150 and ul_sysmon == 7 and ul_pumps == 0
        report(
            "condition fidelity",
            ok,
            f"OL sysmon={ol_sysmon} (want 150), UL sysmon={ul_sysmon} (want 7),"
            f" UL pump failures={ul_pumps} (want 0)",
        )


class TestTrialStructure:
    def test_default_script(self):
        cfg = load_config()
        ok = (
            cfg.script == ("OL", "UL", "OL", "NL", "UL", "NL", "OL")
            and cfg.block_seconds == 450.0
            and cfg.total_seconds == 3150.0
        )
        report("trial structure", ok,
               f"script={'-'.join(cfg.script)}, total={cfg.total_seconds:.0f}s")


class TestScoringProperties:
    def test_randomized_windows_and_oracle(self):
        rng = np.random.default_rng(7)
        violations = 0
        for _ in range(1000):
            n = int(rng.integers(1, 40))
            closures = [
                Closure(
                    float(rng.uniform(0, 100)),
                    rng.choice(["resolved", "automation", "expired"]),
                    None,
                )
                for _ in range(int(rng.integers(0, 6)))
            ]
            closures = [
                Closure(c.t, c.outcome, float(rng.uniform(0, 20)) if c.outcome != "expired" else None)
                for c in closures
            ]
            window = PerformanceWindow(
                t=100.0,
                track_errors=list(rng.uniform(0, 900, size=n)),
                fuel_in_band=list(rng.uniform(0, 1, size=n)),
                sysmon=closures,
                comms=closures,
            )
            sample = windowed_performance(window, sorted(Task), load_config().scoring)
            values = [sample.overall, *sample.per_task.values()]
            if any(not (0.0 <= v <= 1.0) for v in values):
                violations += 1
        band_ok = (
            fuel_score(2500.0) == 1.0
            and abs(fuel_score(2000.0 - 1e-9) - 1.0) < 1e-9
            and abs(fuel_score(3000.0 + 1e-9) - 1.0) < 1e-9
        )

        cfg = load_config(overrides={"seed": 31, "script": ["NL", "OL"],
                                     "pipeline": {"source": "oracle"}})
        log = run_trial(cfg, AdaptationMode.NONE)
        rows = oracle_performance(log)
        worst = max(abs(o - l) for _, o, l in rows)
        ok = violations == 0 and band_ok and worst <= 1e-9
        report(
            "scoring properties",
            ok,
            f"range violations={violations}/1000, fuel band edges ok={band_ok},"
            f" oracle recomputation max |err|={worst:.2e} over {len(rows)} samples",
        )


class TestPipelineCadenceRanges:
    def test_cadence_and_ranges(self):
        cfg = load_config(overrides={"seed": 41, "script": ["OL"],
                                     "pipeline": {"source": "oracle"}})
        log = run_trial(cfg, AdaptationMode.NONE)
        times = [e["t"] for e in log.of_kind("estimate")]
        cadence_ok = (
            len(times) == 85
            and times[0] == 30.0
            and all(round(b - a, 9) == 5.0 for a, b in zip(times, times[1:]))
        )
        range_ok = True
        for e in log.of_kind("estimate"):
            p = e["payload"]
            for comp, hi in COMPONENT_RANGES.items():
                if not (0.0 <= p[comp] <= hi):
                    range_ok = False
            if not (0.0 <= p["overall"] <= 62.0):
                range_ok = False

        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(2, 80))
            t = np.arange(n, dtype=float)
            v = rng.uniform(-500, 500, size=n)
            got = channel_statistics(t, v)
            mean = sum(v) / n
            var = sum((x - mean) ** 2 for x in v) / n
            dt = (t[-1] - t[0]) / (n - 1)
            grad = sum(v[i + 1] - v[i] for i in range(n - 1)) / (n - 1) / dt
            tm = sum(t) / n
            sxx = sum((x - tm) ** 2 for x in t)
            sxy = sum((a - tm) * (b - mean) for a, b in zip(t, v))
            want = (mean, var, grad, sxy / sxx)
            for g, w in zip(got, want):
                scale = max(abs(g), abs(w), 1e-12)
                worst = max(worst, abs(g - w) / scale)
        ok = cadence_ok and range_ok and worst < 1e-9
        report(
            "pipeline cadence and ranges",
            ok,
            f"85 estimates from t=30 at 5s: {cadence_ok}, ranges ok: {range_ok},"
            f" feature oracle max rel err {worst:.2e}",
        )


class TestPredictorNumerics:
    def test_gradient_training_determinism(self):
        x = np.random.default_rng(1).uniform(0, 40, size=(2, 3, 6))
        y = np.array([0.4, 0.9])
        worst = 0.0
        for seed in range(3):
            model = PerformancePredictor(hidden=2, dense=3, num_layers=3, dropout=0.0, seed=seed)
            rng = np.random.default_rng(100 + seed)
            for p in model.params():
                p[:] = rng.uniform(-0.8, 0.8, size=p.shape)
            worst = max(worst, gradient_check(model, x, y))
        grad_ok = worst < 1e-5

        rng = np.random.default_rng(5)
        n = 600
        xs = np.empty((n, 3, 6))
        for j, hi in enumerate((62.0, 22.0, 12.0, 20.0, 4.0, 4.0)):
            xs[:, :, j] = rng.uniform(0, hi, size=(n, 3))
        ys = xs[:, 2, 0] / 62.0
        cfg16 = PredictorConfig(hidden_units=16, dense_units=16, dropout=0.5,
                                epochs=300, batch_size=32)
        m1, l1 = train(xs[:480], ys[:480], cfg16, seed=0)
        mse = float(np.mean((np.clip(m1.forward(xs[480:]), 0, 1) - ys[480:]) ** 2))
        mse_ok = mse < 0.01

        cfg_small = PredictorConfig(hidden_units=4, dense_units=4, dropout=0.8, epochs=15)
        a, la = train(xs[:100], ys[:100], cfg_small, seed=3)
        b, lb = train(xs[:100], ys[:100], cfg_small, seed=3)
        repro_ok = la == lb and all(
            np.array_equal(p, q) for p, q in zip(a.params(), b.params())
        )
        ok = grad_ok and mse_ok and repro_ok
        report(
            "predictor numerics",
            ok,
            f"gradient max rel err {worst:.2e} (<1e-5), held-out MSE {mse:.4f}"
            f" (<0.01), seeded training bitwise reproducible: {repro_ok}",
        )


class TestPolicyCorrectness:
    def test_truth_table_antithrash_modality(self):
        cfg = PolicyConfig(enable_autonomy=True, enable_interaction=True)

        def reference(history, pred):
            if all(s == "OL" for s in history):
                return AdaptationAction.AUTOMATE_INACTIVE
            if all(s == "UL" for s in history):
                return AdaptationAction.DEAUTOMATE_ALL
            if pred < 0.70:
                return AdaptationAction.AUTOMATE_INACTIVE
            if pred > 0.85:
                return AdaptationAction.DEAUTOMATE_ALL
            return AdaptationAction.NO_CHANGE

        table_ok = True
        for history in product(("UL", "NL", "OL"), repeat=3):
            for pred in (0.6, 0.75, 0.9):
                if autonomy_decision(list(history), pred, cfg).action != reference(history, pred):
                    table_ok = False

        st = PolicyState(cfg)
        states = ["OL", "NL"] * 500
        toggles = 0
        for i in range(3, len(states)):
            decision, _, _ = st.policy_tick(states[i - 3 : i], 0.75, [Task.COMMS], None)
            if decision.action != AdaptationAction.NO_CHANGE:
                toggles += 1

        loads = {c: "unloaded" for c in WORKLOAD_COMPONENTS}
        blocked = dict(loads, speech="loaded")
        plans = select_modality(blocked, 1, Task.SYSMON, now=10.0, postpone_s=5.0)
        postponed = [p for p in plans if p.postponed]
        modality_ok = (
            all(p.stimulus != "auditory" or p.postponed for p in plans)
            and len(postponed) == 1
            and postponed[0].deliver_at == 15.0
        )
        fallback = resolve_postponed(postponed[0], blocked, now=15.0)
        still_blocked_ok = fallback.stimulus == "visual_only_fallback" and fallback.deliver_at == 15.0
        cleared = resolve_postponed(postponed[0], loads, now=15.0)
        cleared_ok = cleared.stimulus == "auditory"

        ok = table_ok and toggles == 0 and modality_ok and still_blocked_ok and cleared_ok
        report(
            "policy correctness",
            ok,
            f"truth table 27x3 ok={table_ok}, toggles over 1000 alternating"
            f" estimates={toggles}, postponement/fallback at +5s ok="
            f"{modality_ok and still_blocked_ok and cleared_ok}",
        )


class TestDeterminism:
    def test_full_trial_byte_identical_and_replayable(self):
        cfg = load_config(overrides={"seed": 77, "pipeline": {"source": "oracle"}})
        a = run_trial(cfg, AdaptationMode.BOTH)
        b = run_trial(cfg, AdaptationMode.BOTH)
        identical = a.to_jsonl() == b.to_jsonl()
        result = replay(a)
        replay_ok = result.events_checked == len(a.events)
        ok = identical and replay_ok
        report(
            "determinism",
            ok,
            f"byte-identical logs: {identical}; replay matched"
            f" {result.events_checked}/{len(a.events)} events",
        )


class TestEstimatorTrainability:
    def test_mae_and_classification(self, trained):
        maes = {}
        mae_ok = True
        for idx, comp in enumerate(WORKLOAD_COMPONENTS):
            est = trained["estimators"][comp]
            preds = np.array([est.estimate(r) for r in trained["held_feats"]])
            mae = float(np.abs(preds - trained["held_labels"][:, idx]).mean())
            maes[comp] = 100.0 * mae / COMPONENT_RANGES[comp]
            if maes[comp] >= 10.0:
                mae_ok = False

        majority_ok = True
        fractions = []
        for log in trained["trained_logs"]:
            maj = _majority(log)
            fractions.append(maj)
            if maj["UL"] < 0.70 or maj["OL"] < 0.70:
                majority_ok = False
        ok = mae_ok and majority_ok
        report(
            "estimator trainability",
            ok,
            "held-out MAE % of range: "
            + ", ".join(f"{c}={v:.1f}" for c, v in maes.items())
            + " (<10); majority fractions: "
            + "; ".join(f"UL={m['UL']:.2f},OL={m['OL']:.2f}" for m in fractions)
            + " (>=0.70)",
        )


class TestClosedLoopDirectional:
    def test_none_below_each_adaptive_mode(self, trained):
        seeds = list(range(1, 11))
        adaptive = (AdaptationMode.AUTONOMY, AdaptationMode.INTERACTION, AdaptationMode.BOTH)
        wins = {m: 0 for m in adaptive}
        means = defaultdict(list)
        for seed in seeds:
            row = {}
            for mode in AdaptationMode:
                cfg = load_config(
                    overrides={"seed": seed, "pipeline": trained["pipeline_over"]}
                )
                log = run_trial(cfg, mode, models=trained["models"])
                row[mode] = float(np.mean(block_overall_means(log, "OL")))
                means[mode].append(row[mode])
            for mode in adaptive:
                if row[AdaptationMode.NONE] < row[mode]:
                    wins[mode] += 1
        ok = all(wins[m] >= 8 for m in adaptive)
        report(
            "closed-loop directional reproduction",
            ok,
            "OL-block mean overall: "
            + ", ".join(f"{m.value}={np.mean(means[m]):.3f}" for m in AdaptationMode)
            + "; wins over none (need >=8/10): "
            + ", ".join(f"{m.value}={wins[m]}" for m in adaptive),
        )


class TestConsoleRoundTripSecondary:
    def test_console_round_trip(self):
        from test_gateway import TestConsoleSession, scripted_messages

        tester = TestConsoleSession()
        try:
            tester.test_scripted_session_matches_synthetic_injection()
            log, frames, _ = tester._run_console(scripted_messages())
            from matbsim.triallog import canonical_json
            import json as _json

            byte_stable = all(
                canonical_json(_json.loads(canonical_json(f))) == canonical_json(f)
                for f in frames[:50]
            )
            tester.test_every_frame_icon_matches_policy_output()
            ok = byte_stable
            detail = (
                f"console trace == synthetic trace; {len(frames)} frames,"
                f" icons match policy output, encoding byte-stable={byte_stable}"
            )
        except AssertionError as exc:
            ok = False
            detail = str(exc)
        report("console round trip (secondary)", ok, detail)
