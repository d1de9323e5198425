"""FastAPI application exposing the handlers as JSON routes.

Package errors become structured payloads {category, error_type,
message}: input-shaped problems (graph/model/data) map to 400,
computation-phase problems (fit/learn/inference) to 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ClgnetError, error_category
from . import handlers as h
from . import schemas as sm

_INPUT_CATEGORIES = ("graph", "model", "data")


def create_app(registry: h.ModelRegistry | None = None) -> FastAPI:
    app = FastAPI(title="clgnet", version=__version__)
    app.state.registry = registry if registry is not None else h.ModelRegistry()

    @app.exception_handler(ClgnetError)
    async def _clgnet_error(request: Request, exc: ClgnetError):
        category = error_category(exc)
        status = 400 if category in _INPUT_CATEGORIES else 422
        payload = sm.ErrorPayload(
            category=category, error_type=type(exc).__name__, message=str(exc)
        )
        return JSONResponse(status_code=status, content=payload.model_dump())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/models", response_model=sm.ModelInfo)
    def register_model(req: sm.RegisterRequest) -> sm.ModelInfo:
        return h.handle_register(req, app.state.registry)

    @app.get("/models", response_model=sm.ModelList)
    def list_models() -> sm.ModelList:
        return h.handle_list_models(app.state.registry)

    @app.post("/query", response_model=sm.QueryResponse)
    def query(req: sm.QueryRequest) -> sm.QueryResponse:
        return h.handle_query(req, app.state.registry)

    @app.post("/distribution", response_model=sm.DistributionResponse)
    def distribution(req: sm.DistributionRequest) -> sm.DistributionResponse:
        return h.handle_distribution(req, app.state.registry)

    @app.post("/sample", response_model=sm.SampleResponse)
    def sample(req: sm.SampleRequest) -> sm.SampleResponse:
        return h.handle_sample(req, app.state.registry)

    @app.post("/describe", response_model=sm.DescribeResponse)
    def describe(req: sm.DescribeRequest) -> sm.DescribeResponse:
        return h.handle_describe(req)

    @app.post("/fit", response_model=sm.FitResponse)
    def fit(req: sm.FitRequest) -> sm.FitResponse:
        return h.handle_fit(req)

    @app.post("/learn", response_model=sm.LearnResponse)
    def learn(req: sm.LearnRequest) -> sm.LearnResponse:
        return h.handle_learn(req)

    @app.post("/export-dot", response_model=sm.DotResponse)
    def export_dot(req: sm.DotRequest) -> sm.DotResponse:
        return h.handle_export_dot(req, app.state.registry)

    return app
