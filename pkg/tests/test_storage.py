"""Test the SQLite report index."""

from core.storage import get_report, get_reports, save_report


def _report(eid, classification, filtered=False):
    return {
        "experiment_id": eid,
        "parameters": {"target": "select", "opt": "O2"},
        "classification": classification,
        "findings": [
            {"kind": "control_flow", "site_pc": "0x1010", "function_name": "select", "filtered": filtered}
        ],
        "trace_stats": {"runs": 8},
    }


def test_save_and_get(tmp_path):
    db = str(tmp_path / "sub" / "ctdiff.db")
    save_report(db, _report("e1", "cf_only"))

    rows = get_reports(db)
    assert len(rows) == 1
    assert rows[0]["experiment_id"] == "e1"
    assert rows[0]["parameters"] == {"opt": "O2", "target": "select"}
    assert rows[0]["finding_count"] == 1
    assert get_report(db, "e1") == _report("e1", "cf_only")


def test_filtered_findings_not_counted(tmp_path):
    db = str(tmp_path / "ctdiff.db")
    save_report(db, _report("e1", "none", filtered=True))
    assert get_reports(db)[0]["finding_count"] == 0


def test_replace_and_filter(tmp_path):
    db = str(tmp_path / "ctdiff.db")
    save_report(db, _report("e1", "cf_only"))
    save_report(db, _report("e2", "none", filtered=True))
    save_report(db, _report("e1", "both"))

    assert {r["experiment_id"] for r in get_reports(db)} == {"e1", "e2"}
    assert [r["experiment_id"] for r in get_reports(db, "both")] == ["e1"]
    assert get_reports(db, "cf_only") == []


def test_missing(tmp_path):
    db = str(tmp_path / "ctdiff.db")
    assert get_report(db, "nope") is None
    assert get_reports(db) == []
