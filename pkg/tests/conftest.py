"""Shared helpers for building small traces by hand."""

from typing import Iterable, Optional, Sequence, Tuple

import pytest

from tracing.model import ImageRange, Trace, TraceRecord, TraceSet


def make_trace(
    records: Iterable[TraceRecord],
    run_index: int = 0,
    secret_id: Optional[str] = None,
    image: Tuple[int, int] = (0, 0x1000),
) -> Trace:
    return Trace(
        run_index=run_index,
        secret_id=secret_id or f"{run_index:016x}",
        records=tuple(records),
        image_ranges=(ImageRange(image[0], image[1], "prog"),),
    )


def make_set(*record_lists: Sequence[TraceRecord], program_id: str = "prog") -> TraceSet:
    return TraceSet(program_id, tuple(make_trace(r, run_index=i) for i, r in enumerate(record_lists)))


C = TraceRecord.control
R = TraceRecord.read
W = TraceRecord.write


@pytest.fixture
def fixture_asm_dir():
    from fixtures.suite import FIXTURE_DIR

    return FIXTURE_DIR / "asm"
