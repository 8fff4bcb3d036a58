"""Exact LCS alignment of two traces.

Quadratic in time and memory, so it is bounded to short traces and used to
cross-check the greedy engine rather than in the analysis pipeline.
"""

from dataclasses import dataclass
from typing import List, Sequence

from core.errors import OracleBoundError
from tracing.model import Trace, TraceRecord

MAX_ORACLE_RECORDS = 512


@dataclass(frozen=True)
class NonMatchingRegion:
    """Half-open index ranges left unmatched by the alignment, one per trace.

    Either range may be empty (pure insertion or deletion).
    """

    start_a: int
    end_a: int
    start_b: int
    end_b: int


def _lcs_pairs(a: Sequence[TraceRecord], b: Sequence[TraceRecord]) -> List[tuple]:
    n, m = len(a), len(b)
    # lcs[i][j] = length of LCS of a[i:] and b[j:]
    lcs = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = lcs[i], lcs[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]

    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def oracle_align(a: Trace, b: Trace, bound: int = MAX_ORACLE_RECORDS) -> List[NonMatchingRegion]:
    """Maximal non-matching regions of an LCS alignment over full-record equality.

    Raises:
        OracleBoundError: either trace is longer than ``bound`` records
    """
    ra, rb = a.records, b.records
    if len(ra) > bound or len(rb) > bound:
        raise OracleBoundError(
            f"oracle limited to {bound} records, got {len(ra)} and {len(rb)}"
        )

    # common prefix and suffix are always part of some LCS
    p = 0
    while p < len(ra) and p < len(rb) and ra[p] == rb[p]:
        p += 1
    q = 0
    while q < len(ra) - p and q < len(rb) - p and ra[-1 - q] == rb[-1 - q]:
        q += 1

    mid_a = ra[p : len(ra) - q]
    mid_b = rb[p : len(rb) - q]
    pairs = [(i + p, j + p) for i, j in _lcs_pairs(mid_a, mid_b)]
    pairs.append((len(ra) - q, len(rb) - q))

    regions: List[NonMatchingRegion] = []
    prev_a = prev_b = p
    for i, j in pairs:
        if i > prev_a or j > prev_b:
            regions.append(NonMatchingRegion(prev_a, i, prev_b, j))
        prev_a, prev_b = i + 1, j + 1
    return regions
