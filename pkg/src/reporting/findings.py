"""From raw divergences to a classified per-experiment report.

Pipeline: symbolize, apply the known-issue filter, deduplicate, classify.
Filtered findings stay in the report with ``filtered=True`` and are only
left out of the classification.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Tuple

from core.classification import Classification, LeakKind
from diffing.engine import RawFindings
from reporting.symbols import KnownIssueList, SymbolMap
from tracing.model import TraceSet

UNKNOWN_FUNCTION = "<unknown>"


@dataclass(frozen=True)
class Finding:
    kind: LeakKind
    site_pc: int
    function_name: str = UNKNOWN_FUNCTION
    source_file: Optional[str] = None
    merge_pc: Optional[int] = None
    evidence_count: int = 1
    distinct_values: frozenset = field(default_factory=frozenset)
    filtered: bool = False

    def sort_key(self) -> Tuple[str, str, int]:
        return (self.kind.value, self.function_name, self.site_pc)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "site_pc": f"{self.site_pc:#x}",
            "function_name": self.function_name,
            "source_file": self.source_file,
            "merge_pc": None if self.merge_pc is None else f"{self.merge_pc:#x}",
            "evidence_count": self.evidence_count,
            "distinct_values": [f"{v:#x}" for v in sorted(self.distinct_values)],
            "filtered": self.filtered,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Finding":
        merge_pc = data.get("merge_pc")
        return cls(
            kind=LeakKind(data["kind"]),
            site_pc=int(data["site_pc"], 16),
            function_name=data.get("function_name", UNKNOWN_FUNCTION),
            source_file=data.get("source_file"),
            merge_pc=None if merge_pc is None else int(merge_pc, 16),
            evidence_count=int(data.get("evidence_count", 1)),
            distinct_values=frozenset(int(v, 16) for v in data.get("distinct_values", [])),
            filtered=bool(data.get("filtered", False)),
        )


def symbolize_findings(raw: RawFindings, symbols: Optional[SymbolMap] = None) -> List[Finding]:
    """Attach the containing function to every merged raw finding.

    Args:
        raw: Findings merged by (kind, site)
        symbols: Map to resolve sites against; ``None`` or empty gives ``<unknown>``

    Returns:
        Findings ordered by kind then site
    """
    out = []
    for (kind, site), merged in sorted(raw.merged.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        entry = symbols.lookup(site) if symbols else None
        out.append(
            Finding(
                kind=kind,
                site_pc=site,
                function_name=entry.function_name if entry else UNKNOWN_FUNCTION,
                source_file=entry.source_file if entry else None,
                merge_pc=min(merged.merge_pcs) if merged.merge_pcs else None,
                evidence_count=merged.evidence_count,
                distinct_values=frozenset(merged.distinct_values),
            )
        )
    return out


def apply_known_issue_filter(
    findings: Iterable[Finding], known: Optional[KnownIssueList] = None
) -> List[Finding]:
    """Set ``filtered`` on findings whose function or source file is listed."""
    known = known or KnownIssueList()
    out = []
    for f in findings:
        # <unknown> is a placeholder, not a name, so it never matches
        if f.function_name == UNKNOWN_FUNCTION:
            hit = f.source_file is not None and f.source_file in known.source_files
        else:
            hit = known.matches(f.function_name, f.source_file)
        out.append(replace(f, filtered=hit))
    return out


def deduplicate(findings: Iterable[Finding]) -> List[Finding]:
    """Merge findings per (kind, function); ``<unknown>`` ones only per (kind, site)."""
    groups: Dict[tuple, Finding] = {}
    for f in findings:
        if f.function_name == UNKNOWN_FUNCTION:
            key = (f.kind, UNKNOWN_FUNCTION, f.site_pc)
        else:
            key = (f.kind, f.function_name)
        prev = groups.get(key)
        if prev is None:
            groups[key] = f
            continue
        first = prev if prev.site_pc <= f.site_pc else f
        merges = [m for m in (prev.merge_pc, f.merge_pc) if m is not None]
        groups[key] = Finding(
            kind=f.kind,
            site_pc=first.site_pc,
            function_name=f.function_name,
            source_file=first.source_file or prev.source_file or f.source_file,
            merge_pc=min(merges) if merges else None,
            evidence_count=prev.evidence_count + f.evidence_count,
            distinct_values=prev.distinct_values | f.distinct_values,
            filtered=prev.filtered and f.filtered,
        )
    return sorted(groups.values(), key=Finding.sort_key)


def classify_experiment(findings: Iterable[Finding]) -> Classification:
    return Classification.from_kinds(f.kind for f in findings if not f.filtered)


@dataclass(frozen=True)
class AnalysisReport:
    experiment_id: str
    parameters: Dict[str, Any]
    findings: Tuple[Finding, ...]
    classification: Classification
    trace_stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def unfiltered(self) -> List[Finding]:
        return [f for f in self.findings if not f.filtered]

    def to_dict(self) -> Dict[str, Any]:
        """Plain dict in the fixed key order of the structured report."""
        return {
            "experiment_id": self.experiment_id,
            "parameters": _sorted_mapping(self.parameters),
            "classification": self.classification.value,
            "findings": [f.to_dict() for f in self.findings],
            "trace_stats": _sorted_mapping(self.trace_stats),
        }


def _sorted_mapping(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _sorted_mapping(value[k]) for k in sorted(value, key=str)}
    if isinstance(value, (list, tuple)):
        return [_sorted_mapping(v) for v in value]
    return value


def report_from_dict(data: Dict[str, Any]) -> AnalysisReport:
    return AnalysisReport(
        experiment_id=data["experiment_id"],
        parameters=dict(data.get("parameters", {})),
        findings=tuple(Finding.from_dict(f) for f in data.get("findings", [])),
        classification=Classification(data.get("classification", Classification.NONE.value)),
        trace_stats=dict(data.get("trace_stats", {})),
    )


def trace_stats_for(trace_set: TraceSet) -> Dict[str, Any]:
    return {
        "runs": len(trace_set.traces),
        "records_per_run": [len(t.records) for t in trace_set.traces],
    }


def build_report(
    experiment_id: str,
    parameters: Dict[str, Any],
    raw: RawFindings,
    trace_set: Optional[TraceSet] = None,
    symbols: Optional[SymbolMap] = None,
    known: Optional[KnownIssueList] = None,
) -> AnalysisReport:
    """Run the full pipeline and assemble the report."""
    findings = deduplicate(apply_known_issue_filter(symbolize_findings(raw, symbols), known))
    return AnalysisReport(
        experiment_id=experiment_id,
        parameters=dict(parameters),
        findings=tuple(findings),
        classification=classify_experiment(findings),
        trace_stats=trace_stats_for(trace_set) if trace_set is not None else {},
    )
