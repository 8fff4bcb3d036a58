"""Tests for symbolization, filtering, deduplication and report rendering."""

import json

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import C, make_set
from core.classification import Classification, LeakKind
from diffing.engine import MergedFinding, RawFindings
from reporting.findings import (
    UNKNOWN_FUNCTION,
    AnalysisReport,
    Finding,
    apply_known_issue_filter,
    build_report,
    classify_experiment,
    deduplicate,
    report_from_dict,
    symbolize_findings,
)
from reporting.render import ReportFormat, render_report
from reporting.symbols import KnownIssueList, SymbolEntry, SymbolMap

CF, MEM = LeakKind.CONTROL_FLOW, LeakKind.MEMORY_ADDRESS

SYMBOLS = SymbolMap(
    [
        SymbolEntry(0x00, 0x10, "main", "harness.s"),
        SymbolEntry(0x10, 0x30, "select", "select.c"),
        SymbolEntry(0x40, 0x40, "modexp", "bn_exp.c"),
    ]
)


def _raw(entries):
    return RawFindings(merged={key: value for key, value in entries})


SOURCE_OF = {"main": "harness.s", "select": "select.c", "modexp": "bn_exp.c", UNKNOWN_FUNCTION: None}


@st.composite
def findings(draw):
    name = draw(st.sampled_from(sorted(SOURCE_OF)))
    return Finding(
        kind=draw(st.sampled_from([CF, MEM])),
        site_pc=draw(st.integers(0, 0x80)),
        function_name=name,
        source_file=SOURCE_OF[name],
        merge_pc=draw(st.none() | st.integers(0, 0x80)),
        evidence_count=draw(st.integers(1, 7)),
        distinct_values=draw(st.frozensets(st.integers(0, 0x3000), max_size=3)),
        filtered=draw(st.booleans()),
    )


class TestSymbolize:
    def test_sites_resolve_to_functions(self):
        raw = _raw(
            [
                ((CF, 0x14), MergedFinding(3, frozenset({0x18, 0x20}), frozenset({0x24}))),
                ((MEM, 0x44), MergedFinding(1, frozenset({0x2000}))),
                ((CF, 0x200), MergedFinding(2)),
            ]
        )
        out = symbolize_findings(raw, SYMBOLS)
        assert [(f.kind, f.site_pc, f.function_name) for f in out] == [
            (CF, 0x14, "select"),
            (CF, 0x200, UNKNOWN_FUNCTION),
            (MEM, 0x44, "modexp"),
        ]
        assert out[0].merge_pc == 0x24
        assert out[0].source_file == "select.c"
        assert out[0].evidence_count == 3

    def test_without_symbols_everything_is_unknown(self):
        out = symbolize_findings(_raw([((CF, 0x14), MergedFinding(1))]), None)
        assert out[0].function_name == UNKNOWN_FUNCTION
        assert out[0].source_file is None


class TestKnownIssueFilter:
    def test_function_and_file_entries(self):
        found = [
            Finding(CF, 0x14, "select", "select.c"),
            Finding(MEM, 0x44, "modexp", "bn_exp.c"),
            Finding(CF, 0x04, "main", "harness.s"),
        ]
        known = KnownIssueList(frozenset({"select"}), frozenset({"bn_exp.c"}))
        assert [f.filtered for f in apply_known_issue_filter(found, known)] == [True, True, False]

    def test_unknown_placeholder_never_matches_by_name(self):
        found = [Finding(CF, 0x200)]
        known = KnownIssueList(frozenset({UNKNOWN_FUNCTION}))
        assert not apply_known_issue_filter(found, known)[0].filtered

    def test_no_list_clears_flags(self):
        found = [Finding(CF, 0x14, "select", filtered=True)]
        assert not apply_known_issue_filter(found)[0].filtered


class TestDeduplicate:
    def test_same_function_merges(self):
        merged = deduplicate(
            [
                Finding(CF, 0x20, "select", "select.c", 0x30, 2, frozenset({1})),
                Finding(CF, 0x14, "select", "select.c", None, 3, frozenset({2}), filtered=True),
            ]
        )
        assert merged == [Finding(CF, 0x14, "select", "select.c", 0x30, 5, frozenset({1, 2}), False)]

    def test_unknown_sites_stay_apart(self):
        merged = deduplicate([Finding(CF, 0x200), Finding(CF, 0x300)])
        assert len(merged) == 2

    def test_kinds_stay_apart(self):
        merged = deduplicate([Finding(CF, 0x14, "select"), Finding(MEM, 0x18, "select")])
        assert [f.kind for f in merged] == [CF, MEM]

    @settings(max_examples=200)
    @given(st.lists(findings(), max_size=12))
    def test_idempotent(self, items):
        once = deduplicate(items)
        assert deduplicate(once) == once

    @settings(max_examples=200)
    @given(st.lists(findings(), max_size=12), st.randoms(use_true_random=False))
    def test_order_invariant(self, items, rnd):
        shuffled = list(items)
        rnd.shuffle(shuffled)
        assert deduplicate(shuffled) == deduplicate(items)

    @settings(max_examples=200)
    @given(st.lists(findings(), max_size=12))
    def test_evidence_is_preserved(self, items):
        assert sum(f.evidence_count for f in deduplicate(items)) == sum(f.evidence_count for f in items)


class TestClassification:
    def test_buckets(self):
        assert classify_experiment([]) is Classification.NONE
        assert classify_experiment([Finding(CF, 1)]) is Classification.CONTROL_FLOW_ONLY
        assert classify_experiment([Finding(MEM, 1)]) is Classification.MEMORY_ONLY
        assert classify_experiment([Finding(CF, 1), Finding(MEM, 2)]) is Classification.BOTH

    def test_filtered_findings_do_not_count(self):
        assert classify_experiment([Finding(CF, 1, filtered=True)]) is Classification.NONE
        got = classify_experiment([Finding(CF, 1, filtered=True), Finding(MEM, 2)])
        assert got is Classification.MEMORY_ONLY


def _report(known=None):
    ts = make_set([C(0x00, 0x10), C(0x14, 0x18)], [C(0x00, 0x10), C(0x14, 0x20)])
    raw = _raw([((CF, 0x14), MergedFinding(1, frozenset({0x18, 0x20})))])
    return build_report("abc123", {"program": "select", "runs": 2}, raw, ts, SYMBOLS, known)


class TestBuildReport:
    def test_pipeline(self):
        report = _report()
        assert report.classification is Classification.CONTROL_FLOW_ONLY
        assert report.findings[0].function_name == "select"
        assert report.trace_stats == {"runs": 2, "records_per_run": [2, 2]}

    def test_filtered_finding_kept(self):
        report = _report(KnownIssueList(frozenset({"select"})))
        assert report.classification is Classification.NONE
        assert len(report.findings) == 1
        assert report.findings[0].filtered
        assert report.unfiltered == []

    def test_dict_round_trip(self):
        report = _report()
        assert report_from_dict(report.to_dict()) == report

    def test_dict_uses_hex_strings(self):
        data = _report().to_dict()
        assert list(data) == ["experiment_id", "parameters", "classification", "findings", "trace_stats"]
        assert data["findings"][0]["site_pc"] == "0x14"
        assert data["findings"][0]["distinct_values"] == ["0x18", "0x20"]
        assert data["findings"][0]["merge_pc"] is None


class TestRender:
    def test_structured_is_deterministic(self):
        a = render_report(_report())
        b = render_report(_report())
        assert a == b
        assert json.loads(a)["classification"] == "cf_only"
        assert a.endswith(b"\n")

    def test_parameter_order_does_not_matter(self):
        base = _report()
        swapped = AnalysisReport(
            base.experiment_id,
            dict(reversed(list(base.parameters.items()))),
            base.findings,
            base.classification,
            base.trace_stats,
        )
        assert render_report(swapped) == render_report(base)

    def test_human(self):
        text = render_report(_report(KnownIssueList(frozenset({"select"}))), ReportFormat.HUMAN).decode()
        assert "experiment abc123" in text
        assert "classification: none" in text
        assert "findings: 1 (1 filtered)" in text
        assert "CF  select (select.c) pc 0x14 evidence 1 values {0x18, 0x20} merge none [filtered]" in text

    def test_format_by_name(self):
        assert render_report(_report(), "human").startswith(b"experiment abc123")
