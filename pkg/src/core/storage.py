"""SQLite index of experiment reports, used by ``--save-db`` and the API."""

import json
import sqlite3
import time
from pathlib import Path
from typing import Any, Dict, List, Optional


def init_db(db_path: str) -> None:
    p = Path(db_path)
    p.parent.mkdir(parents=True, exist_ok=True)
    conn = sqlite3.connect(db_path)
    cur = conn.cursor()
    cur.execute(
        """
        CREATE TABLE IF NOT EXISTS experiments (
            experiment_id TEXT PRIMARY KEY,
            classification TEXT NOT NULL,
            parameters_json TEXT,
            report_json TEXT,
            finding_count INTEGER,
            ts INTEGER
        )
        """
    )
    conn.commit()
    conn.close()


def save_report(db_path: str, report: Dict[str, Any]) -> None:
    """Insert or replace a structured report (as produced by ``AnalysisReport.to_dict``)."""
    init_db(db_path)
    conn = sqlite3.connect(db_path)
    cur = conn.cursor()
    unfiltered = [f for f in report.get("findings", []) if not f.get("filtered")]
    cur.execute(
        "INSERT OR REPLACE INTO experiments "
        "(experiment_id, classification, parameters_json, report_json, finding_count, ts) "
        "VALUES (?, ?, ?, ?, ?, ?)",
        (
            report["experiment_id"],
            report.get("classification", "none"),
            json.dumps(report.get("parameters", {}), sort_keys=True),
            json.dumps(report),
            len(unfiltered),
            int(time.time()),
        ),
    )
    conn.commit()
    conn.close()


def get_reports(db_path: str, classification: Optional[str] = None) -> List[Dict[str, Any]]:
    """Index rows, newest first, optionally restricted to one classification."""
    init_db(db_path)
    conn = sqlite3.connect(db_path)
    cur = conn.cursor()
    if classification:
        cur.execute(
            "SELECT experiment_id, classification, parameters_json, finding_count, ts "
            "FROM experiments WHERE classification = ? ORDER BY ts DESC, experiment_id",
            (classification,),
        )
    else:
        cur.execute(
            "SELECT experiment_id, classification, parameters_json, finding_count, ts "
            "FROM experiments ORDER BY ts DESC, experiment_id"
        )
    rows = cur.fetchall()
    conn.close()
    return [
        {
            "experiment_id": eid,
            "classification": cls,
            "parameters": json.loads(params or "{}"),
            "finding_count": count,
            "ts": ts,
        }
        for eid, cls, params, count, ts in rows
    ]


def get_report(db_path: str, experiment_id: str) -> Optional[Dict[str, Any]]:
    init_db(db_path)
    conn = sqlite3.connect(db_path)
    cur = conn.cursor()
    cur.execute("SELECT report_json FROM experiments WHERE experiment_id = ?", (experiment_id,))
    row = cur.fetchone()
    conn.close()
    return json.loads(row[0]) if row else None
