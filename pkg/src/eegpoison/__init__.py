"""Label-flipping data-poisoning benchmark for EEG band-power risk classifiers."""
from .data import Dataset, RiskLabel, SynthSpec, load_csv, stratified_split, synthesize, write_csv
from .experiment import ExperimentConfig, load_config, render_report, run_cell, run_grid
from .kernels import BACKEND
from .metrics import MetricsReport, confusion, evaluate, summarize
from .models import (
    AdaBoostSpec, KNNSpec, MLPSpec, RandomForestSpec, TrainedModel, fit, mlp_gradient_check, predict,
)
from .poison import NextLevel, PoisonSpec, ToTarget, apply_poison, next_level_map, plan_flips

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AdaBoostSpec", "Dataset", "ExperimentConfig", "KNNSpec", "MLPSpec", "MetricsReport",
    "NextLevel", "PoisonSpec", "RandomForestSpec", "RiskLabel", "SynthSpec", "ToTarget", "TrainedModel",
    "apply_poison", "confusion", "evaluate", "fit", "load_config", "load_csv", "mlp_gradient_check",
    "next_level_map", "plan_flips", "predict", "render_report", "run_cell", "run_grid", "stratified_split",
    "summarize", "synthesize", "write_csv",
]
