"""In-memory trace representation.

A trace is the ordered list of control transfers and memory accesses one run
of a program performed. All types here are frozen so traces can be handed to
worker threads without copying.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from core.errors import ScopeError, TraceSetError

ADDRESS_MAX = (1 << 64) - 1


class RecordKind(str, Enum):
    """Event kind, valued by its letter in the trace text format."""

    CONTROL_TRANSFER = "C"
    MEM_READ = "R"
    MEM_WRITE = "W"

    @property
    def is_memory(self) -> bool:
        return self is not RecordKind.CONTROL_TRANSFER


@dataclass(frozen=True)
class TraceRecord:
    """One executed control transfer or memory access.

    ``target_or_addr`` is the resolved next pc for control transfers and the
    effective data address for memory records.
    """

    kind: RecordKind
    pc: int
    target_or_addr: int
    size: int = 0

    @classmethod
    def control(cls, pc: int, target: int) -> "TraceRecord":
        return cls(RecordKind.CONTROL_TRANSFER, pc, target, 0)

    @classmethod
    def read(cls, pc: int, addr: int, size: int) -> "TraceRecord":
        return cls(RecordKind.MEM_READ, pc, addr, size)

    @classmethod
    def write(cls, pc: int, addr: int, size: int) -> "TraceRecord":
        return cls(RecordKind.MEM_WRITE, pc, addr, size)


@dataclass(frozen=True)
class ImageRange:
    """A traced code region ``[base, base + length)``."""

    base: int
    length: int
    name: str = ""

    @property
    def end(self) -> int:
        return self.base + self.length

    def contains(self, pc: int) -> bool:
        return self.base <= pc < self.end


@dataclass(frozen=True)
class Trace:
    run_index: int
    secret_id: str
    records: Tuple[TraceRecord, ...] = ()
    image_ranges: Tuple[ImageRange, ...] = ()

    def __post_init__(self):
        # accept lists from callers, store tuples
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "image_ranges", tuple(self.image_ranges))

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class TraceSet:
    """Traces of one program under pairwise distinct secrets."""

    program_id: str
    traces: Tuple[Trace, ...]
    producer_meta: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))

    @property
    def reference(self) -> Trace:
        return self.traces[0]


def validate_trace(trace: Trace) -> List[str]:
    """Return every invariant violation in ``trace``; empty means well-formed.

    Records are checked for kind/size consistency, 64-bit field ranges and,
    when the trace declares image ranges, pc containment.
    """
    problems: List[str] = []
    if trace.run_index < 0:
        problems.append(f"run_index {trace.run_index} is negative")
    for image in trace.image_ranges:
        if image.base < 0 or image.length < 0 or image.end - 1 > ADDRESS_MAX:
            problems.append(f"image range {image.name or hex(image.base)} is out of bounds")

    for idx, rec in enumerate(trace.records):
        if not isinstance(rec.kind, RecordKind):
            problems.append(f"record {idx}: unknown kind {rec.kind!r}")
            continue
        if rec.kind is RecordKind.CONTROL_TRANSFER and rec.size != 0:
            problems.append(f"record {idx}: control transfer with size {rec.size} (must be 0)")
        elif rec.kind.is_memory and rec.size < 1:
            problems.append(f"record {idx}: memory access with size {rec.size} (must be >= 1)")
        for label, value in (("pc", rec.pc), ("target_or_addr", rec.target_or_addr)):
            if not 0 <= value <= ADDRESS_MAX:
                problems.append(f"record {idx}: {label} {value} is not an unsigned 64-bit value")
        if trace.image_ranges and not any(r.contains(rec.pc) for r in trace.image_ranges):
            problems.append(f"record {idx}: pc {rec.pc:#x} lies outside every image range")
    return problems


def validate_trace_set(trace_set: TraceSet) -> None:
    """Raise :class:`TraceSetError` unless the set can be differenced."""
    traces = trace_set.traces
    if len(traces) < 2:
        raise TraceSetError(f"{trace_set.program_id}: need at least 2 traces, got {len(traces)}")
    seen: Dict[str, int] = {}
    for t in traces:
        if t.secret_id in seen:
            raise TraceSetError(
                f"{trace_set.program_id}: runs {seen[t.secret_id]} and {t.run_index} "
                f"share secret id {t.secret_id}"
            )
        seen[t.secret_id] = t.run_index
    ranges = traces[0].image_ranges
    for t in traces[1:]:
        if t.image_ranges != ranges:
            raise TraceSetError(
                f"{trace_set.program_id}: run {t.run_index} image ranges differ from run "
                f"{traces[0].run_index}"
            )


def _check_include(include: Sequence[Tuple[int, int]]) -> List[Tuple[int, int]]:
    spans = sorted((int(b), int(n)) for b, n in include)
    for base, length in spans:
        if base < 0 or length < 0:
            raise ScopeError(f"include range ({base:#x}, {length:#x}) is negative")
    for (b1, l1), (b2, _) in zip(spans, spans[1:]):
        if b1 + l1 > b2:
            raise ScopeError(f"include ranges at {b1:#x} and {b2:#x} overlap")
    return spans


def scope_filter(trace: Trace, include: Iterable[Tuple[int, int]]) -> Trace:
    """Keep only records whose pc falls inside an include range.

    The returned image ranges are the trace's own ranges clipped to the
    include set, so filtering twice changes nothing. A trace with no image
    ranges adopts the include ranges under the name ``scope``.
    """
    spans = _check_include(list(include))

    def inside(pc: int) -> bool:
        return any(base <= pc < base + length for base, length in spans)

    records = tuple(r for r in trace.records if inside(r.pc))

    if trace.image_ranges:
        clipped: List[ImageRange] = []
        for image in trace.image_ranges:
            for base, length in spans:
                lo = max(image.base, base)
                hi = min(image.end, base + length)
                if lo < hi:
                    clipped.append(ImageRange(lo, hi - lo, image.name))
        images = tuple(clipped)
    else:
        images = tuple(ImageRange(b, n, "scope") for b, n in spans if n > 0)

    return replace(trace, records=records, image_ranges=images)


def entry_pc(trace: Trace) -> Optional[int]:
    """Base of the first image range, the site used for divergences at index 0."""
    if not trace.image_ranges:
        return None
    return trace.image_ranges[0].base
