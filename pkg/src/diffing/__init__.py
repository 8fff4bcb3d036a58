"""Trace differencing: divergence search, merge points and classification."""

from diffing.engine import (
    DiffParams,
    Divergence,
    MergedFinding,
    RawFindings,
    analyze_trace_set,
    classify_divergence,
    diff_traces,
    find_merge_point,
    first_divergence,
)
from diffing.oracle import NonMatchingRegion, oracle_align

__all__ = [
    "DiffParams",
    "Divergence",
    "MergedFinding",
    "NonMatchingRegion",
    "RawFindings",
    "analyze_trace_set",
    "classify_divergence",
    "diff_traces",
    "find_merge_point",
    "first_divergence",
    "oracle_align",
]
