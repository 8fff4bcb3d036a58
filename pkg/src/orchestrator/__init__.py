"""Experiment matrix expansion and execution."""

from orchestrator.matrix import ExperimentSpec, expand_matrix
from orchestrator.runner import (
    analyze_collected,
    collect_trace_set,
    run_experiment,
    run_experiments,
    run_matrix,
)

__all__ = [
    "ExperimentSpec",
    "analyze_collected",
    "collect_trace_set",
    "expand_matrix",
    "run_experiment",
    "run_experiments",
    "run_matrix",
]
