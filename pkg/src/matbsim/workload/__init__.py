"""Perceive stage: physio feature extraction and workload estimation."""
from .context import CONTEXT_DIM, ContextTable, contextual_features
from .features import FEATURE_DIM, PhysioSample, channel_statistics, extract_features
from .mlp import ComponentEstimator, FeedForwardNet, estimate_component, train_component_estimator
from .pipeline import (
    WorkloadEstimate,
    WorkloadPipeline,
    aggregate_overall,
    calibrate_thresholds,
    channel_load_level,
    channel_loads,
    classify_state,
)

__all__ = [
    "CONTEXT_DIM",
    "ComponentEstimator",
    "ContextTable",
    "FEATURE_DIM",
    "FeedForwardNet",
    "PhysioSample",
    "WorkloadEstimate",
    "WorkloadPipeline",
    "aggregate_overall",
    "calibrate_thresholds",
    "channel_load_level",
    "channel_loads",
    "channel_statistics",
    "classify_state",
    "contextual_features",
    "estimate_component",
    "extract_features",
    "train_component_estimator",
]
