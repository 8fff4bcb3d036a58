"""API routes for triggering matrix runs in the background."""

import uuid
from datetime import datetime
from typing import Dict, List, Optional

from fastapi import APIRouter, BackgroundTasks, HTTPException
from pydantic import BaseModel, Field

from api.routes.experiments import db_path

# In-memory run registry; results themselves live in output_dir and the index
_runs: Dict[str, dict] = {}

router = APIRouter()


class MatrixRequest(BaseModel):
    """Request body for starting a matrix run."""

    config: str
    jobs: int = Field(1, ge=1)
    html: Optional[str] = None


class MatrixResponse(BaseModel):
    run_id: str
    status: str
    message: str


class MatrixStatus(BaseModel):
    run_id: str
    status: str  # pending, running, completed, failed
    config: str
    started_at: Optional[str] = None
    completed_at: Optional[str] = None
    summary: Optional[dict] = None
    error: Optional[str] = None


def _run_matrix(run_id: str, request: MatrixRequest) -> None:
    """Background task; sync so it runs in the threadpool with its own event loop."""
    from core.config import load_config, merge_env_config
    from orchestrator.runner import run_matrix

    run = _runs[run_id]
    run["status"] = "running"
    run["started_at"] = datetime.now().isoformat()
    try:
        config = merge_env_config(load_config(request.config))
        summary = run_matrix(config, parallelism=request.jobs, html_path=request.html, db_path=db_path())
        run["summary"] = summary.to_dict()
        run["status"] = "completed"
    except Exception as e:
        run["status"] = "failed"
        run["error"] = str(e)
    run["completed_at"] = datetime.now().isoformat()


@router.post("/matrix", response_model=MatrixResponse)
def create_matrix_run(request: MatrixRequest, background_tasks: BackgroundTasks):
    """Start a matrix run. Poll GET /api/matrix/{run_id} for the summary."""
    run_id = str(uuid.uuid4())
    _runs[run_id] = {
        "run_id": run_id,
        "status": "pending",
        "config": request.config,
        "started_at": None,
        "completed_at": None,
        "summary": None,
        "error": None,
    }
    background_tasks.add_task(_run_matrix, run_id, request)
    return MatrixResponse(
        run_id=run_id,
        status="pending",
        message="Matrix run started. Use GET /api/matrix/{run_id} to check status.",
    )


@router.get("/matrix/{run_id}", response_model=MatrixStatus)
def get_matrix_run(run_id: str):
    if run_id not in _runs:
        raise HTTPException(status_code=404, detail="Matrix run not found")
    return MatrixStatus(**_runs[run_id])


@router.get("/matrix", response_model=List[MatrixStatus])
def list_matrix_runs(limit: int = 20):
    """Most recent runs first."""
    runs = sorted(_runs.values(), key=lambda r: r.get("started_at") or "", reverse=True)
    return [MatrixStatus(**r) for r in runs[:limit]]
