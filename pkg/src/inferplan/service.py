"""HTTP JSON service exposing the catalog and the planner.

Stateless: the catalog is loaded once and shared read-only, every plan
request is computed from scratch, and identical requests produce
identical bodies. An empty search is a domain outcome (200 with an
error payload), not a transport failure.
"""

from __future__ import annotations

import os

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__
from .catalog import Catalog, default_catalog, load_catalog, model_param_count
from .engine import DEFAULT_FLEET_MAX, plan
from .wire import WireGpu, WireModel, WireRequest, WireResponse

ENV_GPUS_FILE = "INFERPLAN_GPUS_FILE"
ENV_MODELS_FILE = "INFERPLAN_MODELS_FILE"
ENV_HOST = "INFERPLAN_HOST"
ENV_PORT = "INFERPLAN_PORT"


def catalog_from_env() -> Catalog:
    gpus = os.environ.get(ENV_GPUS_FILE)
    models = os.environ.get(ENV_MODELS_FILE)
    if gpus and models:
        return load_catalog(gpus, models)
    return default_catalog()


def create_app(catalog: Catalog | None = None,
               fleet_max: int = DEFAULT_FLEET_MAX) -> FastAPI:
    cat = catalog if catalog is not None else catalog_from_env()
    app = FastAPI(title="inferplan", version=__version__)

    @app.get("/api/v1/catalog/gpus")
    def list_gpus() -> list[WireGpu]:
        return [
            WireGpu(
                name=g.name,
                peak_compute=g.peak_compute,
                memory_capacity=g.memory_capacity,
                memory_bandwidth=g.memory_bandwidth,
                comm_bandwidth=g.comm_bandwidth,
                comm_latency=g.comm_latency,
                unit_price=g.unit_price,
            )
            for g in (cat.gpus[name] for name in sorted(cat.gpus))
        ]

    @app.get("/api/v1/catalog/models")
    def list_models() -> list[WireModel]:
        return [
            WireModel(
                name=m.name,
                num_layers=m.num_layers,
                hidden_size=m.hidden_size,
                num_heads=m.num_heads,
                num_kv_heads=m.num_kv_heads,
                ffn_size=m.ffn_size,
                vocab_size=m.vocab_size,
                weight_bytes=m.weight_bytes,
                kv_bytes=m.kv_bytes,
                param_count=model_param_count(m),
            )
            for m in (cat.models[name] for name in sorted(cat.models))
        ]

    @app.post("/api/v1/plan", response_model=WireResponse, response_model_exclude_none=True)
    def plan_endpoint(request: WireRequest):
        if request.model not in cat.models:
            return JSONResponse(
                status_code=404,
                content={"error": {"code": "UNKNOWN_MODEL",
                                   "message": f"model {request.model!r} is not in the catalog"}},
            )
        result = plan(request.to_plan_request(), cat, fleet_max=fleet_max)
        return WireResponse.from_search(result)

    return app


def main() -> None:
    """Entry point for running the service directly."""
    import uvicorn

    uvicorn.run(
        create_app(),
        host=os.environ.get(ENV_HOST, "127.0.0.1"),
        port=int(os.environ.get(ENV_PORT, "8000")),
    )


if __name__ == "__main__":
    main()
