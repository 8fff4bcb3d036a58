"""Read-only access to the experiment result index."""

import os
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, HTTPException, Query
from pydantic import BaseModel

from core.classification import BUCKETS
from core.storage import get_report, get_reports

DEFAULT_DB_PATH = "data/ctdiff.db"

router = APIRouter()


def db_path() -> str:
    return os.environ.get("CTDIFF_DB_PATH", DEFAULT_DB_PATH)


class ExperimentEntry(BaseModel):
    experiment_id: str
    classification: str
    parameters: Dict[str, Any]
    finding_count: int
    ts: int


@router.get("/experiments", response_model=List[ExperimentEntry])
def list_experiments(classification: Optional[str] = Query(None, description="none, cf_only, mem_only or both")):
    """List indexed experiments, newest first."""
    if classification is not None and classification not in BUCKETS:
        raise HTTPException(status_code=422, detail=f"unknown classification {classification!r}")
    try:
        rows = get_reports(db_path(), classification=classification)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
    return [ExperimentEntry(**row) for row in rows]


@router.get("/experiments/{experiment_id}")
def get_experiment(experiment_id: str):
    """Full structured report of one experiment."""
    try:
        report = get_report(db_path(), experiment_id)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
    if report is None:
        raise HTTPException(status_code=404, detail="Experiment not found")
    return report
