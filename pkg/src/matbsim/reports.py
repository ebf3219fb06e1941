"""Log parsing, per-block metric aggregation, and the summary report.

The report mirrors the evaluation tables: for each (adaptation mode x
workload condition) cell it gives tracking RMSE mean/sd, fuel time-in-range
percent, system-monitoring reaction mean/sd and success percent,
communications reaction mean/sd, and overall performance mean/sd.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .tasks import Task
from .triallog import TrialLog


@dataclass
class BlockMetrics:
    label: str
    t_start: float
    t_end: float
    track_errors: list[float] = field(default_factory=list)
    fuel_in_band: list[float] = field(default_factory=list)
    sysmon_rts: list[float] = field(default_factory=list)
    sysmon_total: int = 0
    sysmon_resolved: int = 0
    comms_rts: list[float] = field(default_factory=list)
    comms_total: int = 0
    comms_resolved: int = 0
    overall: list[float] = field(default_factory=list)

    @property
    def tracking_rmse(self) -> float | None:
        if not self.track_errors:
            return None
        return math.sqrt(sum(e * e for e in self.track_errors) / len(self.track_errors))

    @property
    def fuel_tir(self) -> float | None:
        if not self.fuel_in_band:
            return None
        return sum(self.fuel_in_band) / len(self.fuel_in_band)


def split_blocks(log: TrialLog) -> list[BlockMetrics]:
    """Partition a log's metric streams into its workload-condition blocks."""
    block_s = log.header["config"]["block_seconds"]
    blocks: list[BlockMetrics] = []
    for event in log.of_kind("block"):
        blocks.append(
            BlockMetrics(
                label=event["payload"]["label"],
                t_start=event["t"],
                t_end=event["t"] + block_s,
            )
        )

    def block_at(t: float) -> BlockMetrics | None:
        for b in blocks:
            if b.t_start < t <= b.t_end:
                return b
        return None

    for event in log.events:
        kind = event["kind"]
        if kind not in ("track", "fuel", "resolve", "perf"):
            continue
        block = block_at(event["t"])
        if block is None:
            continue
        payload = event["payload"]
        if kind == "track":
            block.track_errors.append(payload["err"])
        elif kind == "fuel":
            block.fuel_in_band.append(payload["in_band"])
        elif kind == "resolve":
            outcome = payload["outcome"]
            if payload["task"] == "sysmon":
                block.sysmon_total += 1
                if outcome in ("resolved", "automation"):
                    block.sysmon_resolved += 1
                    block.sysmon_rts.append(payload["rt"])
            elif payload["task"] == "comms" and payload.get("own"):
                block.comms_total += 1
                if outcome in ("resolved", "automation"):
                    block.comms_resolved += 1
                    block.comms_rts.append(payload["rt"])
        elif kind == "perf":
            block.overall.append(payload["overall"])
    return blocks


def _mean_sd(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = sum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var)


REPORT_COLUMNS = (
    "mode",
    "condition",
    "blocks",
    "tracking_rmse_mean",
    "tracking_rmse_sd",
    "fuel_tir_pct",
    "sysmon_rt_mean",
    "sysmon_rt_sd",
    "sysmon_success_pct",
    "comms_rt_mean",
    "comms_rt_sd",
    "overall_mean",
    "overall_sd",
)


def summarize(logs_by_mode: dict[str, list[TrialLog]]) -> list[dict]:
    """Per-(mode x condition) metric rows, pooled across blocks and logs."""
    rows: list[dict] = []
    for mode in sorted(logs_by_mode):
        grouped: dict[str, list[BlockMetrics]] = {}
        for log in logs_by_mode[mode]:
            for block in split_blocks(log):
                grouped.setdefault(block.label, []).append(block)
        for label in ("UL", "NL", "OL"):
            blocks = grouped.get(label)
            if not blocks:
                continue
            rmses = [b.tracking_rmse for b in blocks if b.tracking_rmse is not None]
            tirs = [b.fuel_tir for b in blocks if b.fuel_tir is not None]
            sys_rts = [rt for b in blocks for rt in b.sysmon_rts]
            comms_rts = [rt for b in blocks for rt in b.comms_rts]
            overall = [o for b in blocks for o in b.overall]
            sys_total = sum(b.sysmon_total for b in blocks)
            sys_resolved = sum(b.sysmon_resolved for b in blocks)
            rmse_mean, rmse_sd = _mean_sd(rmses)
            sys_mean, sys_sd = _mean_sd(sys_rts)
            comms_mean, comms_sd = _mean_sd(comms_rts)
            ov_mean, ov_sd = _mean_sd(overall)
            rows.append(
                {
                    "mode": mode,
                    "condition": label,
                    "blocks": len(blocks),
                    "tracking_rmse_mean": rmse_mean,
                    "tracking_rmse_sd": rmse_sd,
                    "fuel_tir_pct": 100.0 * sum(tirs) / len(tirs) if tirs else None,
                    "sysmon_rt_mean": sys_mean,
                    "sysmon_rt_sd": sys_sd,
                    "sysmon_success_pct": (
                        100.0 * sys_resolved / sys_total if sys_total else None
                    ),
                    "comms_rt_mean": comms_mean,
                    "comms_rt_sd": comms_sd,
                    "overall_mean": ov_mean,
                    "overall_sd": ov_sd,
                }
            )
    return rows


def write_report(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    k: (f"{v:.4f}" if isinstance(v, float) else v)
                    for k, v in row.items()
                }
            )


def block_overall_means(log: TrialLog, label: str) -> list[float]:
    """Mean overall performance per block carrying the given label."""
    means = []
    for block in split_blocks(log):
        if block.label == label and block.overall:
            means.append(sum(block.overall) / len(block.overall))
    return means
