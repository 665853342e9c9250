"""Training pipeline for the GRU ratio-mask postfilter.

Builds datasets from rendered scenario directories, trains a torch GRU mask
estimator with the power-weighted mask loss, and exports weights (plus
feature-normalization statistics) in the inference engine's binary format.
"""

from .dataset import (
    ScenarioTensors,
    build_dataset,
    load_dataset,
    load_scenario,
    save_dataset,
    scenario_dirs,
)
from .model import MaskEstimator, training_loss, weighted_mask_loss
from .train import TrainResult, train
from .weights_export import export_weights, read_exported

__all__ = [
    "MaskEstimator",
    "ScenarioTensors",
    "TrainResult",
    "build_dataset",
    "export_weights",
    "load_dataset",
    "load_scenario",
    "read_exported",
    "save_dataset",
    "scenario_dirs",
    "train",
    "training_loss",
    "weighted_mask_loss",
]

__version__ = "0.1.0"
