"""Trace-set directories: ``run-NN.trace`` files plus a ``traceset.json`` index."""

import json
from pathlib import Path
from typing import Union

from core.errors import TraceSetError
from tracing.codec import read_trace, write_trace
from tracing.model import TraceSet

INDEX_NAME = "traceset.json"


def trace_filename(run_index: int) -> str:
    return f"run-{run_index:02d}.trace"


def write_trace_set(trace_set: TraceSet, directory: Union[str, Path]) -> Path:
    """Write every trace plus the index; returns the directory."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for trace in trace_set.traces:
        name = trace_filename(trace.run_index)
        write_trace(trace, d / name)
        files.append(name)
    index = {
        "program_id": trace_set.program_id,
        "producer_meta": trace_set.producer_meta,
        "runs": files,
    }
    (d / INDEX_NAME).write_text(json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return d


def read_trace_set(directory: Union[str, Path]) -> TraceSet:
    """Load a trace set written by :func:`write_trace_set`.

    A directory without an index is accepted; its ``*.trace`` files are read
    in name order and the directory name becomes the program id.
    """
    d = Path(directory)
    if not d.is_dir():
        raise TraceSetError(f"{d} is not a directory")
    index_path = d / INDEX_NAME
    if index_path.exists():
        try:
            index = json.loads(index_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise TraceSetError(f"{index_path}:{e.lineno}:{e.colno}: {e.msg}") from e
        files = [d / name for name in index.get("runs", [])]
        program_id = index.get("program_id", d.name)
        meta = index.get("producer_meta", {})
    else:
        files = sorted(d.glob("*.trace"))
        program_id = d.name
        meta = {}
    if not files:
        raise TraceSetError(f"{d} contains no traces")
    return TraceSet(program_id, tuple(read_trace(f) for f in files), meta)
