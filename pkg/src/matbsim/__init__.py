"""Closed-loop adaptive multi-attribute task battery simulator.

A deterministic tick engine runs the four supervisory tasks (tracking,
system monitoring, resource management, communications) under scripted
workload conditions; a perceive-select-act loop estimates multi-component
operator workload from synthesized physiology, predicts near-future task
performance with a recurrent network, and adapts autonomy levels and
interaction modalities. Runs headless with a synthetic operator or live
against the browser console through the gateway.
"""
from .config import ScenarioConfig, config_hash, load_config
from .tasks import ALL_TASKS, Task
from .trial import AdaptationMode, TrialModels, replay, run_trial
from .triallog import TrialLog

__version__ = "0.1.0"

__all__ = [
    "ALL_TASKS",
    "AdaptationMode",
    "ScenarioConfig",
    "Task",
    "TrialLog",
    "TrialModels",
    "config_hash",
    "load_config",
    "replay",
    "run_trial",
    "__version__",
]
