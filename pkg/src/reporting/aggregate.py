"""Classification counts across experiments, grouped by parameter keys."""

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence, Union

from core.classification import BUCKETS, LeakKind
from core.errors import AggregationError
from reporting.findings import AnalysisReport

TABLE_HEADER = ["group", *BUCKETS, "failed"]


@dataclass(frozen=True)
class FailureRecord:
    """A matrix cell that produced no report."""

    experiment_id: str
    error: str
    parameters: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment_id": self.experiment_id,
            "error": self.error,
            "parameters": {k: self.parameters[k] for k in sorted(self.parameters)},
        }


@dataclass
class GroupCounts:
    none: int = 0
    cf_only: int = 0
    mem_only: int = 0
    both: int = 0
    failed: int = 0

    def add(self, bucket: str) -> None:
        setattr(self, bucket, getattr(self, bucket) + 1)

    @property
    def total(self) -> int:
        return self.none + self.cf_only + self.mem_only + self.both + self.failed

    def as_row(self) -> List[int]:
        return [getattr(self, b) for b in BUCKETS] + [self.failed]

    def to_dict(self) -> Dict[str, int]:
        return dict(zip(TABLE_HEADER[1:], self.as_row()))


@dataclass
class MatrixSummary:
    group_by: List[str] = field(default_factory=list)
    # key -> group value -> counts, groups in first-seen order
    tables: Dict[str, Dict[str, GroupCounts]] = field(default_factory=dict)
    totals: Dict[str, int] = field(default_factory=dict)
    failures: List[FailureRecord] = field(default_factory=list)

    @property
    def succeeded(self) -> int:
        return self.totals.get("succeeded", 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group_by": list(self.group_by),
            "tables": {
                key: [{"group": g, **counts.to_dict()} for g, counts in groups.items()]
                for key, groups in self.tables.items()
            },
            "totals": dict(self.totals),
            "failures": [f.to_dict() for f in self.failures],
        }


def _group_value(value: Any) -> str:
    return value if isinstance(value, str) else str(value)


def aggregate_summaries(
    reports: Sequence[Union[AnalysisReport, FailureRecord]],
    group_by: Sequence[str],
    failures: Iterable[FailureRecord] = (),
) -> MatrixSummary:
    """Count classifications per group for every ``group_by`` key.

    Groups appear in the order their first experiment is seen. ``reports``
    may interleave failure records with reports so that order follows the
    matrix expansion; ``failures`` are walked after ``reports``.

    Args:
        reports: Experiment reports, optionally mixed with failure records
        group_by: Parameter keys to group on
        failures: Further failed cells; counted in the ``failed`` column

    Returns:
        MatrixSummary whose per-group counts partition the group's experiments

    Raises:
        AggregationError: a report lacks one of the ``group_by`` keys
    """
    summary = MatrixSummary(group_by=list(group_by), tables={k: {} for k in group_by})
    totals: Dict[str, int] = {b: 0 for b in BUCKETS}
    totals.update({k.value: 0 for k in LeakKind})
    totals["filtered"] = 0
    seen_failures: List[FailureRecord] = []
    succeeded = 0

    for result in [*reports, *failures]:
        if isinstance(result, FailureRecord):
            seen_failures.append(result)
            for key in group_by:
                group = _group_value(result.parameters.get(key, "<missing>"))
                summary.tables[key].setdefault(group, GroupCounts()).add("failed")
            continue

        for key in group_by:
            if key not in result.parameters:
                raise AggregationError(
                    f"report {result.experiment_id} has no parameter {key!r}"
                )
            group = _group_value(result.parameters[key])
            summary.tables[key].setdefault(group, GroupCounts()).add(result.classification.value)
        succeeded += 1
        totals[result.classification.value] += 1
        for f in result.findings:
            if f.filtered:
                totals["filtered"] += 1
            else:
                totals[f.kind.value] += 1

    totals["experiments"] = succeeded + len(seen_failures)
    totals["succeeded"] = succeeded
    totals["failed"] = len(seen_failures)
    summary.totals = totals
    summary.failures = seen_failures
    return summary


def emit_tables(summary: MatrixSummary, group_key: str) -> bytes:
    """CSV with header ``group,none,cf_only,mem_only,both,failed``.

    Raises:
        AggregationError: ``group_key`` was not aggregated
    """
    if group_key not in summary.tables:
        raise AggregationError(f"summary has no group key {group_key!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for group, counts in summary.tables[group_key].items():
        writer.writerow([group, *counts.as_row()])
    return buf.getvalue().encode("utf-8")


def summary_from_dict(data: Dict[str, Any]) -> MatrixSummary:
    tables: Dict[str, Dict[str, GroupCounts]] = {}
    for key, rows in data.get("tables", {}).items():
        tables[key] = {
            row["group"]: GroupCounts(**{b: int(row.get(b, 0)) for b in TABLE_HEADER[1:]})
            for row in rows
        }
    return MatrixSummary(
        group_by=list(data.get("group_by", [])),
        tables=tables,
        totals=dict(data.get("totals", {})),
        failures=[
            FailureRecord(f["experiment_id"], f["error"], f.get("parameters", {}))
            for f in data.get("failures", [])
        ],
    )

