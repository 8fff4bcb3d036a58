"""ctdiff API server.

FastAPI application exposing the experiment result index and matrix runs.
"""

import logging
import os
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from api.routes.experiments import db_path
from api.routes.experiments import router as experiments_router
from api.routes.matrix import router as matrix_router
from core.producer import get_registry
from ctdiff.__version__ import __version__
from orchestrator.producers import init_default_producers

logger = logging.getLogger("ctdiff.api")


@asynccontextmanager
async def lifespan(app: FastAPI):
    init_default_producers()
    logger.info(f"ctdiff API v{__version__} starting, result index at {db_path()}")
    yield
    logger.info("ctdiff API shutting down")


app = FastAPI(
    title="ctdiff API",
    description="""
## ctdiff - constant-time verification by trace differencing

- Browse indexed experiment reports and their classifications
- Start matrix runs from a configuration file and poll their summaries
    """,
    version=__version__,
    lifespan=lifespan,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=os.environ.get("CORS_ORIGINS", "*").split(","),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(experiments_router, prefix="/api", tags=["Experiments"])
app.include_router(matrix_router, prefix="/api", tags=["Matrix"])


@app.get("/", tags=["Health"])
def read_root():
    """API info."""
    return {
        "message": "Welcome to the ctdiff API",
        "name": "ctdiff",
        "version": __version__,
        "docs": "/docs",
    }


@app.get("/health", tags=["Health"])
def health_check():
    return {"status": "healthy", "version": __version__}


@app.get("/api/producers", tags=["Info"])
def list_producers():
    """List registered trace producers."""
    producers = init_default_producers(get_registry()).list()
    return {
        "count": len(producers),
        "producers": [
            {"name": name, "description": p.description} for name, p in sorted(producers.items())
        ],
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        app,
        host=os.getenv("API_HOST", "0.0.0.0"),
        port=int(os.getenv("API_PORT", 8000)),
    )
