"""Future task-performance prediction from workload estimate sequences."""
from .dataset import TrainingSample, build_training_set, to_arrays
from .lstm import LSTMLayer
from .model import (
    INPUT_DIM,
    INPUT_SCALE,
    SEQ_LEN,
    PerformancePredictor,
    gradient_check,
    train,
)

__all__ = [
    "INPUT_DIM",
    "INPUT_SCALE",
    "LSTMLayer",
    "PerformancePredictor",
    "SEQ_LEN",
    "TrainingSample",
    "build_training_set",
    "gradient_check",
    "to_arrays",
    "train",
]
