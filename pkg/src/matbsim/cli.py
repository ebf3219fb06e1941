"""Command-line interface.

Subcommands: run, replay, export, summarize, train-estimators,
train-predictor. The MATBSIM_LOG_DIR environment variable overrides where
relative log paths are written and read.
"""
from __future__ import annotations

import argparse
import glob as globlib
import os
import sys
from pathlib import Path

import numpy as np

from . import persistence
from .config import WORKLOAD_COMPONENTS, load_config
from .datasets import export_training_data, read_estimator_csv, read_predictor_csv
from .errors import MatbError, ReplayDivergence
from .gateway import serve_console_trial
from .reports import summarize, write_report
from .trial import AdaptationMode, TrialModels, replay, run_trial
from .triallog import TrialLog
from .workload.mlp import train_component_estimator


def log_dir() -> Path:
    return Path(os.environ.get("MATBSIM_LOG_DIR", "."))


def _resolve(path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else log_dir() / p


def _load_models(args) -> TrialModels:
    estimators = None
    predictor = None
    if getattr(args, "estimators", None):
        estimators = persistence.load_estimators(_resolve(args.estimators))
    if getattr(args, "predictor", None):
        predictor = persistence.load_predictor(_resolve(args.predictor))
    return TrialModels(estimators=estimators, predictor=predictor)


def cmd_run(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.operator is not None:
        overrides["operator"] = {"profile": args.operator}
    if args.oracle:
        overrides["pipeline"] = {"source": "oracle"}
    cfg = load_config(args.config, overrides)
    mode = AdaptationMode(args.mode)
    models = _load_models(args)
    out = _resolve(args.out) if args.out else None

    if args.console:
        log = serve_console_trial(cfg, mode, models=models, port=args.port)
        if log is not None and out is not None:
            log.write(out)
        return 0

    log = run_trial(cfg, mode, models=models, log_path=out)
    n_actions = sum(1 for e in log.events if e["kind"] == "action")
    perf = [e["payload"]["overall"] for e in log.events if e["kind"] == "perf"]
    mean_perf = sum(perf) / len(perf) if perf else float("nan")
    print(
        f"trial complete: {len(log.events)} events, {n_actions} adaptation actions,"
        f" mean overall performance {mean_perf:.3f}"
    )
    if out is not None:
        print(f"log written to {out}")
    return 0


def cmd_replay(args) -> int:
    log = TrialLog.read(_resolve(args.log))
    models = _load_models(args)
    try:
        result = replay(log, models=models)
    except ReplayDivergence as exc:
        print(f"replay FAILED: {exc}", file=sys.stderr)
        return 1
    print(f"replay ok: {result.events_checked} events matched")
    return 0


def cmd_export(args) -> int:
    log = TrialLog.read(_resolve(args.log))
    paths = export_training_data(log, _resolve(args.out))
    for kind, path in paths.items():
        if path is not None:
            print(f"{kind} dataset: {path}")
    return 0


def cmd_summarize(args) -> int:
    logs_by_mode: dict[str, list[TrialLog]] = {}
    for pattern in args.glob:
        for name in sorted(globlib.glob(str(_resolve(pattern)))):
            log = TrialLog.read(name)
            logs_by_mode.setdefault(log.header["mode"], []).append(log)
    if not logs_by_mode:
        print("no logs matched", file=sys.stderr)
        return 1
    rows = summarize(logs_by_mode)
    out = _resolve(args.out)
    write_report(rows, out)
    print(f"report with {len(rows)} rows written to {out}")
    return 0


def cmd_train_estimators(args) -> int:
    feats, labels = read_estimator_csv(_resolve(args.dataset))
    cfg = load_config(args.config)
    out_dir = _resolve(args.out)
    estimators = {}
    for idx, component in enumerate(WORKLOAD_COMPONENTS):
        est, losses = train_component_estimator(
            (feats, labels[:, idx]),
            component,
            hidden_layers=cfg.pipeline.hidden_layers,
            learning_rate=cfg.pipeline.learning_rate,
            epochs=args.epochs or cfg.pipeline.epochs,
            seed=args.seed,
        )
        estimators[component] = est
        print(f"{component}: final training loss {losses[-1]:.5f}")
    persistence.save_estimators(out_dir, estimators)
    print(f"estimators written to {out_dir}")
    return 0


def cmd_train_predictor(args) -> int:
    from .predictor.model import train

    x, y = read_predictor_csv(_resolve(args.dataset))
    cfg = load_config(args.config)
    pcfg = cfg.predictor
    if args.units:
        from dataclasses import replace

        pcfg = replace(pcfg, hidden_units=args.units, dense_units=args.units)
    if args.epochs:
        from dataclasses import replace

        pcfg = replace(pcfg, epochs=args.epochs)
    model, losses = train(x, y, pcfg, seed=args.seed)
    persistence.save_predictor(_resolve(args.out), model)
    print(f"final training loss {losses[-1]:.5f}; model written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matbsim",
        description="Closed-loop adaptive multi-attribute task battery simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one trial (headless or console)")
    p.add_argument("--config", help="scenario YAML file")
    p.add_argument("--mode", default="none",
                   choices=[m.value for m in AdaptationMode])
    p.add_argument("--seed", type=int)
    p.add_argument("--operator", help="synthetic operator profile preset")
    p.add_argument("--oracle", action="store_true",
                   help="use ground-truth induced loads as workload estimates")
    p.add_argument("--estimators", help="directory of trained estimator files")
    p.add_argument("--predictor", help="trained predictor weights file")
    p.add_argument("--console", action="store_true",
                   help="serve a live console session instead of the synthetic operator")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--out", help="write the trial log here (JSONL)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="verify a log replays event-for-event")
    p.add_argument("--log", required=True)
    p.add_argument("--estimators")
    p.add_argument("--predictor")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("export", help="export training datasets from a log")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("summarize", help="aggregate logs into the summary report")
    p.add_argument("--glob", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("train-estimators", help="train workload component estimators")
    p.add_argument("--dataset", required=True, help="estimator CSV from export")
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_estimators)

    p = sub.add_parser("train-predictor", help="train the performance predictor")
    p.add_argument("--dataset", required=True, help="predictor CSV from export")
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output weights file")
    p.add_argument("--units", type=int, help="LSTM/dense width override")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_predictor)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MatbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
