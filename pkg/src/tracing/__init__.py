"""Execution trace model, text codec and on-disk trace sets."""

from tracing.model import (
    ImageRange,
    RecordKind,
    Trace,
    TraceRecord,
    TraceSet,
    scope_filter,
    validate_trace,
    validate_trace_set,
)
from tracing.codec import decode_trace, encode_trace

__all__ = [
    "ImageRange",
    "RecordKind",
    "Trace",
    "TraceRecord",
    "TraceSet",
    "decode_trace",
    "encode_trace",
    "scope_filter",
    "validate_trace",
    "validate_trace_set",
]
