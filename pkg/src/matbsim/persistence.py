"""Language-neutral text format for model weights.

Layout:

    matbsim-weights v1
    kind <model-kind>
    meta <key> <json value>          (zero or more)
    array <name> <ndim> <dim0> <dim1> ...
    <row-major values, one line per leading-axis slice, repr floats>

Full-precision reprs round-trip doubles exactly, so save -> load is
bit-identical.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ModelError
from .predictor.model import PerformancePredictor
from .workload.mlp import ComponentEstimator, FeedForwardNet

MAGIC = "matbsim-weights v1"


def save_arrays(path: str | Path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    lines = [MAGIC, f"kind {kind}"]
    for key, value in meta.items():
        lines.append(f"meta {key} {json.dumps(value)}")
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype=float)
        dims = " ".join(str(d) for d in arr.shape)
        lines.append(f"array {name} {arr.ndim} {dims}".rstrip())
        rows = arr.reshape(arr.shape[0], -1) if arr.ndim > 1 else arr.reshape(1, -1)
        for row in rows:
            lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_arrays(path: str | Path) -> tuple[str, dict, dict[str, np.ndarray]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MAGIC:
        raise ModelError(f"{path}: not a weights file")
    if not lines[1].startswith("kind "):
        raise ModelError(f"{path}: missing kind line")
    kind = lines[1][5:]
    meta: dict = {}
    arrays: dict[str, np.ndarray] = {}
    i = 2
    while i < len(lines):
        line = lines[i]
        if line.startswith("meta "):
            _, key, raw = line.split(" ", 2)
            meta[key] = json.loads(raw)
            i += 1
        elif line.startswith("array "):
            parts = line.split()
            name, ndim = parts[1], int(parts[2])
            shape = tuple(int(d) for d in parts[3 : 3 + ndim])
            n_rows = shape[0] if ndim > 1 else 1
            data = [
                [float(v) for v in lines[i + 1 + r].split()] for r in range(n_rows)
            ]
            arrays[name] = np.array(data).reshape(shape)
            i += 1 + n_rows
        elif not line.strip():
            i += 1
        else:
            raise ModelError(f"{path}: unexpected line {i}: {line[:40]!r}")
    return kind, meta, arrays


def save_estimator(path: str | Path, est: ComponentEstimator) -> None:
    arrays = {}
    for idx, (w, b) in enumerate(zip(est.net.weights, est.net.biases)):
        arrays[f"w{idx}"] = w
        arrays[f"b{idx}"] = b
    if est.x_mean is not None:
        arrays["x_mean"] = est.x_mean
        arrays["x_scale"] = est.x_scale
    save_arrays(
        path,
        "component-estimator",
        {"component": est.component, "layer_sizes": list(est.net.layer_sizes)},
        arrays,
    )


def load_estimator(path: str | Path) -> ComponentEstimator:
    kind, meta, arrays = load_arrays(path)
    if kind != "component-estimator":
        raise ModelError(f"{path}: expected component-estimator, got {kind}")
    net = FeedForwardNet(tuple(meta["layer_sizes"]), seed=0)
    for idx in range(len(net.weights)):
        net.weights[idx] = arrays[f"w{idx}"]
        net.biases[idx] = arrays[f"b{idx}"]
    return ComponentEstimator(
        meta["component"], net, arrays.get("x_mean"), arrays.get("x_scale")
    )


def save_estimators(dir_path: str | Path, estimators: dict[str, ComponentEstimator]) -> None:
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    for name, est in estimators.items():
        save_estimator(dir_path / f"estimator_{name}.txt", est)


def load_estimators(dir_path: str | Path) -> dict[str, ComponentEstimator]:
    dir_path = Path(dir_path)
    out: dict[str, ComponentEstimator] = {}
    for path in sorted(dir_path.glob("estimator_*.txt")):
        est = load_estimator(path)
        out[est.component] = est
    if not out:
        raise ModelError(f"no estimator files under {dir_path}")
    return out


def save_predictor(path: str | Path, model: PerformancePredictor) -> None:
    arrays: dict[str, np.ndarray] = {}
    for idx, layer in enumerate(model.layers):
        arrays[f"lstm{idx}_wx"] = layer.wx
        arrays[f"lstm{idx}_wh"] = layer.wh
        arrays[f"lstm{idx}_b"] = layer.b
    arrays["w_dense"] = model.w_dense
    arrays["b_dense"] = model.b_dense
    arrays["w_out"] = model.w_out
    arrays["b_out"] = model.b_out
    save_arrays(
        path,
        "performance-predictor",
        {
            "hidden": model.hidden,
            "dense": model.dense,
            "num_layers": len(model.layers),
            "dropout": model.dropout,
        },
        arrays,
    )


def load_predictor(path: str | Path) -> PerformancePredictor:
    kind, meta, arrays = load_arrays(path)
    if kind != "performance-predictor":
        raise ModelError(f"{path}: expected performance-predictor, got {kind}")
    model = PerformancePredictor(
        hidden=meta["hidden"],
        dense=meta["dense"],
        num_layers=meta["num_layers"],
        dropout=meta["dropout"],
        seed=0,
    )
    for idx, layer in enumerate(model.layers):
        layer.wx = arrays[f"lstm{idx}_wx"]
        layer.wh = arrays[f"lstm{idx}_wh"]
        layer.b = arrays[f"lstm{idx}_b"]
    model.w_dense = arrays["w_dense"]
    model.b_dense = arrays["b_dense"]
    model.w_out = arrays["w_out"]
    model.b_out = arrays["b_out"]
    return model
