"""Greedy trace differencing.

Two traces are walked in lockstep until the first differing record. That
divergence is classified, then a forward search looks for the nearest pair
of offsets at which ``window`` records agree again. Comparison resumes there.
Records between a divergence and its merge point are never inspected, so the
findings are a lower bound on the true differences.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from core.classification import LeakKind
from tracing.model import Trace, TraceRecord, TraceSet, entry_pc, validate_trace_set

logger = logging.getLogger("ctdiff.diff")


class ReferenceStrategy(str, Enum):
    FIRST_TRACE = "first_trace"


@dataclass(frozen=True)
class DiffParams:
    """Merge acceptance window and per-trace forward search horizon."""

    window: int = 8
    horizon: int = 4096
    reference_strategy: ReferenceStrategy = ReferenceStrategy.FIRST_TRACE

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.horizon < self.window:
            raise ValueError(f"horizon ({self.horizon}) must be >= window ({self.window})")

    def to_dict(self) -> Dict[str, object]:
        return {"window": self.window, "horizon": self.horizon}


@dataclass(frozen=True)
class Divergence:
    kind: LeakKind
    site_pc: int
    div_index_a: int
    div_index_b: int
    merge: Optional[Tuple[int, int]] = None
    witnesses: Tuple[int, ...] = ()


class Classified(NamedTuple):
    kind: LeakKind
    site_pc: int


@dataclass(frozen=True)
class MergedFinding:
    evidence_count: int
    distinct_values: FrozenSet[int] = frozenset()
    merge_pcs: FrozenSet[int] = frozenset()

    def combine(self, other: "MergedFinding") -> "MergedFinding":
        return MergedFinding(
            self.evidence_count + other.evidence_count,
            self.distinct_values | other.distinct_values,
            self.merge_pcs | other.merge_pcs,
        )


FindingKey = Tuple[LeakKind, int]


@dataclass(frozen=True)
class RawFindings:
    """Divergences per (reference run, other run) pair, plus a per-site merge.

    ``merge`` is associative and commutative, so per-pair results may be
    reduced in any order.
    """

    pairs: Dict[Tuple[int, int], Tuple[Divergence, ...]] = field(default_factory=dict)
    merged: Dict[FindingKey, MergedFinding] = field(default_factory=dict)

    @classmethod
    def from_pair(
        cls,
        pair: Tuple[int, int],
        divergences: Sequence[Divergence],
        reference: Optional[Trace] = None,
    ) -> "RawFindings":
        merged: Dict[FindingKey, MergedFinding] = {}
        for div in divergences:
            key = (div.kind, div.site_pc)
            merge_pcs: FrozenSet[int] = frozenset()
            if div.merge is not None and reference is not None and div.merge[0] < len(reference):
                merge_pcs = frozenset({reference.records[div.merge[0]].pc})
            entry = MergedFinding(1, frozenset(div.witnesses), merge_pcs)
            if key in merged:
                # the same site twice in one pair still counts as one pair of evidence
                prev = merged[key]
                entry = MergedFinding(1, prev.distinct_values | entry.distinct_values,
                                      prev.merge_pcs | entry.merge_pcs)
            merged[key] = entry
        return cls({pair: tuple(divergences)}, merged)

    def merge(self, other: "RawFindings") -> "RawFindings":
        pairs = dict(self.pairs)
        pairs.update(other.pairs)
        merged = dict(self.merged)
        for key, value in other.merged.items():
            merged[key] = merged[key].combine(value) if key in merged else value
        return RawFindings(pairs, merged)

    def __bool__(self) -> bool:
        return bool(self.merged)


def first_divergence(a: Trace, b: Trace) -> Optional[int]:
    """Index of the first differing record, ``None`` if the traces are identical.

    When one trace is a strict prefix of the other the result is the shorter
    length.
    """
    ra, rb = a.records, b.records
    n = min(len(ra), len(rb))
    for i in range(n):
        if ra[i] != rb[i]:
            return i
    if len(ra) == len(rb):
        return None
    return n


def _candidates(s: int, lo: int, hi: int) -> Iterator[int]:
    # i values with i + j == s, ordered by |i - j| then i
    c = s // 2
    odd = s % 2
    k = 0
    while True:
        pair = (c - k, c + k) if not odd else (c - k, c + 1 + k)
        if pair[0] < lo and pair[1] > hi:
            return
        for i in sorted(set(pair)):
            if lo <= i <= hi:
                yield i
        k += 1


def _find_merge(
    a: Sequence[TraceRecord],
    b: Sequence[TraceRecord],
    da: int,
    db: int,
    params: DiffParams,
) -> Optional[Tuple[int, int]]:
    la, lb = len(a), len(b)
    w, h = params.window, params.horizon
    imax = min(h, la - da)
    jmax = min(h, lb - db)
    if imax < 1 or jmax < 1:
        return None

    for s in range(2, imax + jmax + 1):
        lo = max(1, s - jmax)
        hi = min(imax, s - 1)
        if lo > hi:
            continue
        for i in _candidates(s, lo, hi):
            j = s - i
            pa, pb = da + i, db + j
            if pa + w <= la and pb + w <= lb:
                if a[pa] == b[pb] and a[pa : pa + w] == b[pb : pb + w]:
                    return i, j
            elif la - pa == lb - pb and a[pa:] == b[pb:]:
                return i, j
    return None


def find_merge_point(a: Trace, b: Trace, d: int, params: DiffParams = DiffParams()) -> Optional[Tuple[int, int]]:
    """Smallest offsets ``(i, j)`` past ``d`` at which the traces re-align.

    Candidates satisfy ``1 <= i, j <= horizon`` and are ranked by ``i + j``,
    then ``|i - j|``, then ``i``. A candidate is accepted when ``window``
    records starting at ``a[d + i]`` and ``b[d + j]`` are equal. Near the end
    of either trace the window may be shorter, in which case both remaining
    suffixes must be equal in full.
    """
    return _find_merge(a.records, b.records, d, d, params)


def classify_divergence(
    ra: Optional[TraceRecord],
    rb: Optional[TraceRecord],
    last_common: Optional[TraceRecord] = None,
    entry: int = 0,
) -> Classified:
    """Decide the leak kind and site for two differing records.

    ``ra`` or ``rb`` is ``None`` when that trace already ended. A divergence
    at index 0 has no ``last_common`` record and is attributed to ``entry``.
    """
    if (
        ra is not None
        and rb is not None
        and ra.kind.is_memory
        and ra.kind == rb.kind
        and ra.pc == rb.pc
        and ra.target_or_addr != rb.target_or_addr
    ):
        return Classified(LeakKind.MEMORY_ADDRESS, ra.pc)
    if ra is not None and rb is not None and ra.pc == rb.pc:
        return Classified(LeakKind.CONTROL_FLOW, ra.pc)
    if last_common is not None:
        return Classified(LeakKind.CONTROL_FLOW, last_common.pc)
    return Classified(LeakKind.CONTROL_FLOW, entry)


def _witnesses(ra: Optional[TraceRecord], rb: Optional[TraceRecord]) -> Tuple[int, ...]:
    present = [r for r in (ra, rb) if r is not None]
    if len(present) == 2 and ra.pc == rb.pc:
        return tuple(sorted({ra.target_or_addr, rb.target_or_addr}))
    return tuple(sorted({r.pc for r in present}))


def diff_traces(a: Trace, b: Trace, params: DiffParams = DiffParams()) -> List[Divergence]:
    """All divergences the greedy walk reports for ``a`` against ``b``.

    The walk stops at the first divergence with no merge point inside the
    horizon.
    """
    ra, rb = a.records, b.records
    la, lb = len(ra), len(rb)
    entry = entry_pc(a) or 0
    out: List[Divergence] = []
    pa = pb = 0

    while True:
        while pa < la and pb < lb and ra[pa] == rb[pb]:
            pa += 1
            pb += 1
        if pa == la and pb == lb:
            break

        rec_a = ra[pa] if pa < la else None
        rec_b = rb[pb] if pb < lb else None
        last = ra[pa - 1] if pa > 0 else None
        kind, site = classify_divergence(rec_a, rec_b, last, entry)

        offsets = _find_merge(ra, rb, pa, pb, params)
        merge = (pa + offsets[0], pb + offsets[1]) if offsets else None
        out.append(Divergence(kind, site, pa, pb, merge, _witnesses(rec_a, rec_b)))
        logger.debug(
            f"run {a.run_index} vs {b.run_index}: {kind.value} at pc {site:#x} "
            f"(index {pa}/{pb}, merge {merge})"
        )
        if merge is None:
            break
        pa, pb = merge
    return out


def analyze_trace_set(trace_set: TraceSet, params: DiffParams = DiffParams()) -> RawFindings:
    """Diff every trace against the first and merge the results by (kind, site).

    Raises:
        TraceSetError: fewer than two traces, repeated secrets or mismatched
            image ranges
    """
    validate_trace_set(trace_set)
    reference = trace_set.reference
    result = RawFindings()
    for other in trace_set.traces[1:]:
        divergences = diff_traces(reference, other, params)
        pair = (reference.run_index, other.run_index)
        result = result.merge(RawFindings.from_pair(pair, divergences, reference))
    logger.debug(
        f"{trace_set.program_id}: {len(result.merged)} distinct site(s) over "
        f"{len(trace_set.traces) - 1} pair(s)"
    )
    return result
