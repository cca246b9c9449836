"""HTTP layer: one endpoint per experiment kind, plus campaign and health."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import PolylabError
from .api import (
    POINT_KINDS,
    run_campaign,
    run_caps,
    run_grassmann,
    run_point_experiment,
)
from .schemas import (
    CampaignModel,
    CampaignResponse,
    CapsRequest,
    ExperimentRequest,
    ExperimentResponse,
    GrassmannRequest,
)


def create_app() -> FastAPI:
    app = FastAPI(title="polylab", description=__doc__)

    @app.exception_handler(PolylabError)
    async def _domain_error(_: Request, exc: PolylabError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    def _register(kind: str) -> None:
        def run(req: ExperimentRequest) -> ExperimentResponse:
            return run_point_experiment(kind, req)

        app.post(
            f"/experiments/{kind}",
            response_model=ExperimentResponse,
            name=f"run_{kind.replace('-', '_')}",
        )(run)

    for point_kind in POINT_KINDS:
        _register(point_kind)

    @app.post("/experiments/grassmann", response_model=ExperimentResponse)
    def grassmann(req: GrassmannRequest) -> ExperimentResponse:
        return run_grassmann(req)

    @app.post("/experiments/caps", response_model=ExperimentResponse)
    def caps(req: CapsRequest) -> ExperimentResponse:
        return run_caps(req)

    @app.post("/campaign", response_model=CampaignResponse)
    def campaign(model: CampaignModel) -> CampaignResponse:
        return run_campaign(model)

    return app
