"""FastAPI service wrapping the benchmark harness.

Endpoints:
    GET  /health   liveness and version
    POST /cell     run one (dim, rho, filter) cell, return its statistics
    POST /grid     run a full sweep, return cells, win probabilities, and
                   the rendered artifact files (cells.csv, winprob.csv,
                   one SVG heatmap per filter pair)

The service is stateless: every request carries its full configuration
including the master seed, and responses are pure functions of requests.
Run it with ``uvicorn coordpf.service:app`` or ``bench serve``.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .bench import grid_sweep, run_cell
from .reporting import artifact_files
from .schemas import (
    CellRequest,
    CellResponse,
    GridRequest,
    GridResponse,
    HealthResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="coordpf bench",
        version=__version__,
        description="Particle-filter benchmark grids as a service.",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/cell", response_model=CellResponse)
    def cell(request: CellRequest) -> CellResponse:
        try:
            cfg = request.to_config()
            stats = run_cell(cfg, request.dim, request.rho, request.filter)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return CellResponse.from_statistics(stats)

    @app.post("/grid", response_model=GridResponse)
    def grid(request: GridRequest) -> GridResponse:
        try:
            cfg = request.to_config()
            result = grid_sweep(cfg, workers=request.workers)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return GridResponse.from_result(result, artifact_files(result))

    return app


app = create_app()
