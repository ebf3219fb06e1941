"""Scenario configuration.

One human-readable YAML file configures a whole trial: seeds, condition
parameters, station layout, fuel rates, scoring constants, pipeline and
predictor hyper-parameters, policy thresholds, and the synthetic-operator
profile. Every dataclass below maps 1:1 onto a YAML section; anything not
present in the file keeps its default. `config_hash` covers exactly the
semantic fields, so two configs hash equal iff they describe the same
scenario.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError
from .tasks import ALL_TASKS, Task

WORKLOAD_COMPONENTS: tuple[str, ...] = (
    "cognitive",
    "physical",
    "visual",
    "auditory",
    "speech",
)

# Theoretical per-component ranges; overall is their sum (0-62).
COMPONENT_RANGES: dict[str, float] = {
    "cognitive": 22.0,
    "physical": 12.0,
    "visual": 20.0,
    "auditory": 4.0,
    "speech": 4.0,
}
OVERALL_RANGE: float = sum(COMPONENT_RANGES.values())

PHYSIO_CHANNELS: tuple[str, ...] = (
    "heart_rate",
    "hr_variability",
    "respiration_rate",
    "posture_magnitude",
    "noise_level",
    "speech_rate",
    "speech_intensity",
    "pitch",
)


@dataclass
class TrackingConfig:
    screen_w: float = 1280.0
    screen_h: float = 720.0
    drift_px_per_tick: float = 2.0          # manual-mode random-walk step
    joystick_gain: float = 240.0            # px/s at full deflection
    auto_gain: float = 3.0                  # 1/s proportional pull to center
    alert_radius: float = 240.0             # error treated as out-of-range

    @property
    def center(self) -> tuple[float, float]:
        return (self.screen_w / 2.0, self.screen_h / 2.0)


@dataclass
class FuelConfig:
    pump_rate: float = 800.0                # units/minute, every pump
    consumption: float = 800.0              # units/minute drained from A and B
    start_ab: float = 2500.0
    capacity_ab: float = 4000.0
    start_cd: float = 1200.0
    capacity_cd: float = 2000.0
    pump_repair_s: float = 45.0             # failed pumps self-repair after this
    band: tuple[float, float] = (2000.0, 3000.0)


@dataclass
class SysmonConfig:
    window_s: float = 15.0                  # uncorrected events expire (failure)


@dataclass
class CommsConfig:
    own_callsign: str = "NASA 504"
    foreign_callsigns: tuple[str, ...] = ("NASA 315", "NASA 731", "NASA 062")
    foreign_ratio: float = 0.5              # fraction of requests to other aircraft
    response_window_s: float = 30.0
    audio_s: float = 5.0                    # request audio duration
    radios: tuple[str, ...] = ("COM1", "COM2", "NAV1", "NAV2")
    freq_low: float = 110.0
    freq_high: float = 135.0


@dataclass
class ConditionConfig:
    """Per-label event-rate bundle. Ranges are inclusive, sampled per minute."""

    sysmon_events_per_min: int
    pump_failures_per_min: tuple[int, int]
    pump_failure_alternate: bool            # zero on even minutes (0-indexed)
    comms_requests_per_min: tuple[int, int]
    tracking_mode_policy: str               # always_auto | always_manual | alternate
    tracking_alternate_s: float = 150.0
    tracking_alternate_start: str = "manual"


def default_conditions() -> dict[str, ConditionConfig]:
    return {
        "UL": ConditionConfig(
            sysmon_events_per_min=1,
            pump_failures_per_min=(0, 0),
            pump_failure_alternate=False,
            comms_requests_per_min=(1, 2),
            tracking_mode_policy="always_auto",
        ),
        "NL": ConditionConfig(
            sysmon_events_per_min=5,
            pump_failures_per_min=(1, 2),
            pump_failure_alternate=True,
            comms_requests_per_min=(2, 8),
            tracking_mode_policy="alternate",
        ),
        "OL": ConditionConfig(
            sysmon_events_per_min=20,
            pump_failures_per_min=(2, 3),
            pump_failure_alternate=False,
            comms_requests_per_min=(8, 10),
            tracking_mode_policy="always_manual",
        ),
    }


@dataclass
class LayoutConfig:
    """Physical station layout. From any station only that station and its
    adjacent one are visible (never more than two)."""

    positions: dict[str, tuple[float, float]] = field(
        default_factory=lambda: {
            "tracking": (0.0, 0.0),
            "sysmon": (3.0, 0.0),
            "comms": (0.0, 3.0),
            "resman": (3.0, 3.0),
        }
    )
    adjacency: dict[str, str] = field(
        default_factory=lambda: {
            "tracking": "sysmon",
            "sysmon": "tracking",
            "comms": "resman",
            "resman": "comms",
        }
    )
    walk_speed: float = 1.0                 # m/s


@dataclass
class ScoringConfig:
    r_max: float = 240.0                    # px, tracking RMSE normalization
    sysmon_window_s: float = 15.0
    comms_window_s: float = 30.0
    fuel_band: tuple[float, float] = (2000.0, 3000.0)
    perf_window_s: float = 30.0             # window for performance samples
    sample_period_s: float = 1.0            # tracking/fuel series cadence


@dataclass
class PipelineConfig:
    epoch_s: float = 30.0
    cadence_s: float = 5.0
    physio_hz: float = 2.0
    theta_low: float = 19.21                # UL/NL boundary on overall estimate
    theta_high: float = 36.345              # NL/OL boundary
    cutoff_loaded: float = 0.3              # channel-load fractions of range
    cutoff_overloaded: float = 0.7
    hidden_layers: tuple[int, ...] = (32, 32)
    learning_rate: float = 1e-3
    epochs: int = 400
    source: str = "models"                  # models | oracle (ground-truth loads)
    context_table: dict[str, tuple[float, float, float, float, float]] = field(
        default_factory=lambda: {
            # (cognitive, physical, visual, auditory, speech) nominal loads
            "tracking": (6.0, 2.0, 8.0, 0.0, 0.0),
            "sysmon": (5.0, 1.0, 6.0, 0.5, 0.0),
            "resman": (5.0, 3.0, 4.0, 0.0, 0.0),
            "comms": (5.0, 2.0, 2.0, 3.0, 3.5),
        }
    )


@dataclass
class PredictorConfig:
    hidden_units: int = 256
    dense_units: int = 256
    num_layers: int = 3
    dropout: float = 0.8
    horizon_s: float = 60.0
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 150


@dataclass
class PolicyConfigData:
    perf_low: float = 0.70
    perf_high: float = 0.85
    hysteresis_len: int = 3
    postpone_s: float = 5.0


@dataclass
class OperatorConfig:
    profile: str = "nominal"
    overrides: dict[str, Any] = field(default_factory=dict)


@dataclass
class EngineConfig:
    tick_hz: int = 20
    automation_latency_s: float = 1.0
    tracking: TrackingConfig = field(default_factory=TrackingConfig)
    fuel: FuelConfig = field(default_factory=FuelConfig)
    sysmon: SysmonConfig = field(default_factory=SysmonConfig)
    comms: CommsConfig = field(default_factory=CommsConfig)

    @property
    def tick_seconds(self) -> float:
        return 1.0 / self.tick_hz


@dataclass
class ScenarioConfig:
    seed: int = 1
    script: tuple[str, ...] = ("OL", "UL", "OL", "NL", "UL", "NL", "OL")
    block_seconds: float = 450.0
    engine: EngineConfig = field(default_factory=EngineConfig)
    conditions: dict[str, ConditionConfig] = field(default_factory=default_conditions)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    policy: PolicyConfigData = field(default_factory=PolicyConfigData)
    operator: OperatorConfig = field(default_factory=OperatorConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def total_seconds(self) -> float:
        return self.block_seconds * len(self.script)


def _merge(base: Any, override: Mapping[str, Any], path: str = "") -> None:
    """Recursively apply a mapping of overrides onto a dataclass tree."""
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if not hasattr(base, key):
            raise ConfigError(f"unknown config field: {where}")
        current = getattr(base, key)
        if isinstance(value, Mapping) and hasattr(current, "__dataclass_fields__"):
            _merge(current, value, where)
        elif isinstance(value, Mapping) and isinstance(current, dict):
            merged = dict(current)
            for k, v in value.items():
                if isinstance(v, Mapping) and k in merged and hasattr(
                    merged[k], "__dataclass_fields__"
                ):
                    _merge(merged[k], v, f"{where}.{k}")
                else:
                    merged[k] = _coerce_like(merged.get(k), v)
            setattr(base, key, merged)
        else:
            setattr(base, key, _coerce_like(current, value))


def _coerce_like(current: Any, value: Any) -> Any:
    if isinstance(current, tuple) and isinstance(value, (list, tuple)):
        return tuple(value)
    return value


def load_config(path: str | Path | None = None, overrides: Mapping | None = None) -> ScenarioConfig:
    """Build a ScenarioConfig from defaults + YAML file + in-memory overrides."""
    cfg = ScenarioConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, Mapping):
            raise ConfigError(f"config file {path} must contain a mapping")
        _apply_condition_section(cfg, data)
        _merge(cfg, {k: v for k, v in data.items() if k != "conditions"})
    if overrides:
        _apply_condition_section(cfg, overrides)
        _merge(cfg, {k: v for k, v in overrides.items() if k != "conditions"})
    _validate(cfg)
    return cfg


def _apply_condition_section(cfg: ScenarioConfig, data: Mapping) -> None:
    section = data.get("conditions")
    if not section:
        return
    for label, fields in section.items():
        if label not in cfg.conditions:
            raise ConfigError(f"unknown workload condition label: {label}")
        _merge(cfg.conditions[label], fields, f"conditions.{label}")


def _validate(cfg: ScenarioConfig) -> None:
    for label in cfg.script:
        if label not in cfg.conditions:
            raise ConfigError(f"script references unknown condition {label!r}")
    if cfg.policy.perf_low >= cfg.policy.perf_high:
        raise ConfigError("policy.perf_low must be < policy.perf_high")
    if cfg.policy.hysteresis_len < 1:
        raise ConfigError("policy.hysteresis_len must be >= 1")
    if not (0.0 < cfg.pipeline.cutoff_loaded < cfg.pipeline.cutoff_overloaded < 1.0):
        raise ConfigError("pipeline cutoffs must satisfy 0 < loaded < overloaded < 1")
    if cfg.scoring.r_max <= 0:
        raise ConfigError("scoring.r_max must be positive")
    for task in ALL_TASKS:
        if task.value not in cfg.layout.positions:
            raise ConfigError(f"layout.positions missing {task.value}")
        if task.value not in cfg.pipeline.context_table:
            raise ConfigError(f"pipeline.context_table missing {task.value}")


def config_hash(cfg: ScenarioConfig) -> str:
    """Stable hash over all semantic configuration fields."""
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def context_row(cfg: PipelineConfig, task: Task) -> tuple[float, ...]:
    try:
        return tuple(cfg.context_table[task.value])
    except KeyError as exc:
        raise ConfigError(f"context table has no row for task {task!r}") from exc
