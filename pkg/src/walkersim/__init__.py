"""Simulator and analysis toolkit for a robotic walker with a pneumatic walking-assist device."""

__version__ = "0.1.0"

from .analysis import GaitFeatures, analyze_traces
from .batch import BatchSpec, default_batch, run_batch
from .config import ScenarioConfig, TimelineEvent, load_scenario
from .gaitgen import Condition, GaitParams, synthesize_trial
from .kernel import RunRecord, run_scenario, scripted_events
from .stats import compare_conditions, shapiro_wilk, t_test

__all__ = [
    "BatchSpec", "Condition", "GaitFeatures", "GaitParams", "RunRecord", "ScenarioConfig", "TimelineEvent",
    "analyze_traces", "compare_conditions", "default_batch", "load_scenario", "run_batch", "run_scenario",
    "scripted_events", "shapiro_wilk", "synthesize_trial", "t_test",
]
