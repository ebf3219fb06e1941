"""Training-data export from trial logs.

Estimator rows pair the pipeline's feature vector (epoch statistics +
contextual features) with ground-truth labels: the epoch-mean induced load
per component, scaled to that component's theoretical range. Predictor rows
come from the recorded estimate stream and the performance sample one
horizon ahead. Console-session logs carry no induced-load ground truth, so
their estimator export is skipped with a notice.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .config import COMPONENT_RANGES, PHYSIO_CHANNELS, WORKLOAD_COMPONENTS, load_config
from .engine.inputs import input_from_payload
from .engine.layout import StationLayout, infer_active_tasks
from .errors import ExportError
from .predictor.dataset import TrainingSample, build_training_set
from .scoring import PerformanceSample
from .triallog import TrialLog
from .workload.context import ContextTable, contextual_features
from .workload.features import STAT_NAMES, PhysioSample, extract_features
from .workload.pipeline import WorkloadEstimate


def parse_estimates(log: TrialLog) -> list[WorkloadEstimate]:
    return [
        WorkloadEstimate.from_payload(e["t"], e["payload"]) for e in log.of_kind("estimate")
    ]


def parse_performance(log: TrialLog) -> list[PerformanceSample]:
    out = []
    for e in log.of_kind("perf"):
        payload = e["payload"]
        out.append(
            PerformanceSample(
                timestamp=e["t"],
                per_task={},
                overall=payload["overall"],
                raw=payload.get("raw", {}),
            )
        )
    return out


def estimator_rows(log: TrialLog) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """(features (n, 37), scaled labels (n, 5), timestamps) from one log."""
    physio = [(e["t"], e["payload"]) for e in log.of_kind("physio")]
    if not physio:
        raise ExportError("log has no physio stream")
    operator = str(log.header.get("operator", ""))
    if operator.startswith("console") or not any("load" in p for _, p in physio):
        raise ExportError(
            "log has no induced-load ground truth (console session);"
            " estimator export skipped"
        )
    cfg = load_config(overrides=log.header["config"])
    layout = StationLayout.from_config(cfg.layout)
    table = ContextTable.from_config(cfg.pipeline)
    epoch = cfg.pipeline.epoch_s
    cadence = cfg.pipeline.cadence_s

    inputs = [(e["t"], e["payload"]) for e in log.of_kind("input")]
    samples = [PhysioSample.from_payload(t, p) for t, p in physio]
    loads = [(t, p["load"]) for t, p in physio if "load" in p]

    features: list[np.ndarray] = []
    labels: list[list[float]] = []
    times: list[float] = []
    input_idx = 0
    last_input = None
    t = epoch
    end = cfg.total_seconds
    while t <= end + 1e-9:
        while input_idx < len(inputs) and inputs[input_idx][0] <= t:
            last_input = input_from_payload(*inputs[input_idx])
            input_idx += 1
        window = [s for s in samples if t - epoch - 1e-9 <= s.t <= t + 1e-9]
        load_window = [ld for (lt, ld) in loads if t - epoch - 1e-9 <= lt <= t + 1e-9]
        if len(window) >= 2 and load_window:
            active = sorted(infer_active_tasks(last_input, layout))
            stats = extract_features(window, epoch)
            ctx = contextual_features(active, table)
            features.append(np.concatenate([stats, ctx]))
            labels.append(
                [
                    COMPONENT_RANGES[name]
                    * (sum(ld[name] for ld in load_window) / len(load_window))
                    for name in WORKLOAD_COMPONENTS
                ]
            )
            times.append(t)
        t += cadence
    return np.array(features), np.array(labels), times


def predictor_samples(log: TrialLog) -> list[TrainingSample]:
    cfg = load_config(overrides=log.header["config"])
    estimates = parse_estimates(log)
    performance = parse_performance(log)
    return build_training_set(
        estimates,
        performance,
        trial_end=cfg.total_seconds,
        horizon_s=cfg.predictor.horizon_s,
        cadence_s=cfg.pipeline.cadence_s,
        perf_window_s=cfg.scoring.perf_window_s,
    )


ESTIMATOR_HEADER = (
    ["t"]
    + [f"{ch}_{st}" for ch in PHYSIO_CHANNELS for st in STAT_NAMES]
    + [f"ctx_{c}" for c in WORKLOAD_COMPONENTS]
    + [f"label_{c}" for c in WORKLOAD_COMPONENTS]
)

PREDICTOR_HEADER = ["t"] + [
    f"x{row}_{col}" for row in range(3) for col in range(6)
] + ["target"]


def export_training_data(log: TrialLog, out_dir: str | Path) -> dict[str, Path | None]:
    """Write estimator and predictor CSV datasets; returns the paths (the
    estimator path is None when ground-truth labels are unavailable)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path | None] = {"estimator": None, "predictor": None}

    try:
        feats, labels, times = estimator_rows(log)
    except ExportError as exc:
        print(f"notice: {exc}")
    else:
        path = out_dir / "estimator_dataset.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(ESTIMATOR_HEADER)
            for t, f, l in zip(times, feats, labels):
                writer.writerow(
                    [repr(float(t))]
                    + [repr(float(v)) for v in f]
                    + [repr(float(v)) for v in l]
                )
        paths["estimator"] = path

    samples = predictor_samples(log)
    if samples:
        path = out_dir / "predictor_dataset.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(PREDICTOR_HEADER)
            for s in samples:
                row = (
                    [repr(float(s.t))]
                    + [repr(float(v)) for v in s.inputs.ravel()]
                    + [repr(float(s.target))]
                )
                writer.writerow(row)
        paths["predictor"] = path
    else:
        print("notice: log has no estimate stream; predictor export skipped")
    return paths


def read_estimator_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    n_feat = len(ESTIMATOR_HEADER) - 1 - len(WORKLOAD_COMPONENTS)
    return rows[:, 1 : 1 + n_feat], rows[:, 1 + n_feat :]


def read_predictor_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    x = rows[:, 1:19].reshape(-1, 3, 6)
    return x, rows[:, 19]
