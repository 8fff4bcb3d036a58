"""Structured (JSON) and human-readable report rendering."""

import json
from enum import Enum
from typing import List, Union

from core.classification import short_kind
from reporting.findings import AnalysisReport


class ReportFormat(str, Enum):
    STRUCTURED = "structured"
    HUMAN = "human"


def render_report(report: AnalysisReport, fmt: Union[ReportFormat, str] = ReportFormat.STRUCTURED) -> bytes:
    """Render ``report``; equal reports always produce identical bytes."""
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.STRUCTURED:
        return (json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    return _render_human(report).encode("utf-8")


def _render_human(report: AnalysisReport) -> str:
    lines: List[str] = [
        f"experiment {report.experiment_id}",
        f"classification: {report.classification.value}",
    ]
    if report.parameters:
        params = " ".join(f"{k}={report.parameters[k]}" for k in sorted(report.parameters, key=str))
        lines.append(f"parameters: {params}")
    runs = report.trace_stats.get("runs")
    if runs is not None:
        counts = report.trace_stats.get("records_per_run", [])
        lines.append(f"traces: {runs} runs, records per run {counts}")

    filtered = sum(1 for f in report.findings if f.filtered)
    lines.append(f"findings: {len(report.findings)} ({filtered} filtered)")
    for f in sorted(report.findings, key=lambda f: f.sort_key()):
        where = f.function_name if f.source_file is None else f"{f.function_name} ({f.source_file})"
        values = ", ".join(f"{v:#x}" for v in sorted(f.distinct_values))
        merge = "none" if f.merge_pc is None else f"{f.merge_pc:#x}"
        tag = " [filtered]" if f.filtered else ""
        lines.append(
            f"  {short_kind(f.kind):<3} {where} pc {f.site_pc:#x} evidence {f.evidence_count} "
            f"values {{{values}}} merge {merge}{tag}"
        )
    return "\n".join(lines) + "\n"
