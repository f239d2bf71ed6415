"""HTTP service exposing campaigns to the dashboard and scripted clients.

Resource layout:
    POST /campaigns                      create (inline CSV, file path, or bundled catalog)
    GET  /campaigns                      list handles
    GET  /campaigns/{id}                 one handle
    GET  /campaigns/{id}/suggestions     pending batch (generated on first call per iteration)
    POST /campaigns/{id}/observations    submit one measured suggestion
    GET  /campaigns/{id}/report          full trace + front + per-row posterior detail
    POST /campaigns/{id}/run             drive a simulation campaign to completion

Every campaign carries its own mutual-exclusion guard: writes serialize per
campaign, reads take the same guard briefly, and independent campaigns never
contend.  Each write persists the full state document before the response is
sent, so a crash-restart resumes from the last acknowledged observation.
"""

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .campaign import (
    RUNNING,
    SIMULATION,
    CampaignConfig,
    CampaignState,
    SuggestionRecord,
    init_campaign,
    load_campaign,
    save_campaign,
    scale_inputs,
    step,
    submit_observation,
)
from .data import (
    CatalogSchema,
    TabularDataset,
    load_bundled_catalog,
    load_catalog,
    load_schema,
    parse_catalog_text,
    save_catalog,
    save_schema,
)
from .errors import (
    CampaignStateError,
    ConfigError,
    DuplicateObservationError,
    ExhaustedCatalogError,
    InsufficientDataError,
    InvalidArgumentError,
    ParetoPoolError,
    ParseError,
    ProtocolError,
    SchemaError,
)
from .gp import predict_batch

_CONFLICT_ERRORS = (
    CampaignStateError,
    DuplicateObservationError,
    ExhaustedCatalogError,
    ProtocolError,
)
_VALIDATION_ERRORS = (
    ConfigError,
    InsufficientDataError,
    InvalidArgumentError,
    ParseError,
    SchemaError,
)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _config_digest(config: CampaignConfig) -> str:
    canonical = json.dumps(config.as_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _to_http(exc: ParetoPoolError) -> HTTPException:
    if isinstance(exc, _CONFLICT_ERRORS):
        return HTTPException(status_code=409, detail=str(exc))
    if isinstance(exc, _VALIDATION_ERRORS):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=400, detail=str(exc))


@dataclass
class CampaignRuntime:
    """One hosted campaign: handle metadata, data, state, and its write guard."""

    handle_id: str
    created_at: str
    config: CampaignConfig
    catalog: TabularDataset
    state: CampaignState
    lock: threading.Lock = field(default_factory=threading.Lock)

    def handle(self) -> dict:
        return {
            "id": self.handle_id,
            "created_at": self.created_at,
            "config_digest": _config_digest(self.config),
            "mode": self.config.mode,
            "status": self.state.status,
        }


class CampaignRegistry:
    """Campaigns hosted by this process, mirrored to a data directory."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._campaigns: dict[str, CampaignRuntime] = {}
        for meta_path in sorted(self.data_dir.glob("*.meta.json")):
            self._restore(meta_path)

    def _paths(self, handle_id: str) -> dict[str, Path]:
        base = self.data_dir / handle_id
        return {
            "meta": base.with_suffix(".meta.json"),
            "catalog": base.with_suffix(".catalog.csv"),
            "schema": base.with_suffix(".schema.json"),
            "state": base.with_suffix(".state.json"),
        }

    def _restore(self, meta_path: Path) -> None:
        with open(meta_path, encoding="utf-8") as handle:
            meta = json.load(handle)
        paths = self._paths(meta["id"])
        catalog = load_catalog(paths["catalog"], load_schema(paths["schema"]))
        state, config = load_campaign(paths["state"], catalog)
        self._campaigns[meta["id"]] = CampaignRuntime(
            handle_id=meta["id"],
            created_at=meta["created_at"],
            config=config,
            catalog=catalog,
            state=state,
        )

    def create(self, catalog: TabularDataset, config: CampaignConfig) -> CampaignRuntime:
        state = init_campaign(catalog, config)
        runtime = CampaignRuntime(
            handle_id=uuid.uuid4().hex,
            created_at=_utcnow(),
            config=config,
            catalog=catalog,
            state=state,
        )
        paths = self._paths(runtime.handle_id)
        with open(paths["meta"], "w", encoding="utf-8") as handle:
            json.dump({"id": runtime.handle_id, "created_at": runtime.created_at}, handle)
        save_catalog(catalog, paths["catalog"])
        save_schema(catalog.schema, paths["schema"])
        save_campaign(state, config, catalog, paths["state"])
        with self._lock:
            self._campaigns[runtime.handle_id] = runtime
        return runtime

    def persist(self, runtime: CampaignRuntime) -> None:
        save_campaign(
            runtime.state, runtime.config, runtime.catalog,
            self._paths(runtime.handle_id)["state"],
        )

    def get(self, handle_id: str) -> CampaignRuntime:
        with self._lock:
            runtime = self._campaigns.get(handle_id)
        if runtime is None:
            raise HTTPException(status_code=404, detail=f"no campaign {handle_id!r}")
        return runtime

    def list(self) -> list[dict]:
        with self._lock:
            runtimes = sorted(self._campaigns.values(), key=lambda r: r.created_at)
        return [r.handle() for r in runtimes]


class CatalogSource(BaseModel):
    """Exactly one of csv (inline, with schema), path, or bundled."""

    csv: str | None = None
    catalog_schema: dict | None = Field(default=None, alias="schema")
    path: str | None = None
    bundled: str | None = None

    model_config = {"populate_by_name": True}


class CreateCampaignRequest(BaseModel):
    config: dict = Field(default_factory=dict)
    catalog: CatalogSource


class ObservationRequest(BaseModel):
    snapped_index: int
    values: list[float]


def _resolve_catalog(source: CatalogSource) -> TabularDataset:
    given = [name for name in ("csv", "path", "bundled") if getattr(source, name) is not None]
    if len(given) != 1:
        raise HTTPException(
            status_code=422,
            detail="catalog must set exactly one of: csv, path, bundled",
        )
    if source.bundled is not None:
        if source.bundled not in ("campaign", "full"):
            raise HTTPException(
                status_code=422, detail="catalog.bundled must be 'campaign' or 'full'"
            )
        return load_bundled_catalog(full_features=source.bundled == "full")
    if source.csv is not None:
        if source.catalog_schema is None:
            raise HTTPException(
                status_code=422, detail="catalog.schema is required with inline csv"
            )
        return parse_catalog_text(source.csv, CatalogSchema.from_dict(source.catalog_schema))
    path = Path(source.path)
    if not path.exists():
        raise HTTPException(status_code=422, detail=f"catalog.path {source.path!r} not found")
    if source.catalog_schema is not None:
        schema = CatalogSchema.from_dict(source.catalog_schema)
    else:
        sidecar = path.with_suffix(".schema.json")
        if not sidecar.exists():
            raise HTTPException(
                status_code=422,
                detail=f"catalog.schema missing and no sidecar {sidecar.name!r} found",
            )
        schema = load_schema(sidecar)
    return load_catalog(path, schema)


def _suggestion_payload(
    record: SuggestionRecord, runtime: CampaignRuntime, signs: np.ndarray
) -> dict:
    catalog = runtime.catalog
    idx = record.snapped_index
    payload = record.as_dict()
    payload["catalog_row"] = {
        name: float(catalog.features[idx, j])
        for j, name in enumerate(catalog.feature_names)
    }
    state = runtime.state
    if state.models is None:
        payload["predicted"] = None
        return payload
    point = scale_inputs(catalog).matrix[idx]
    predicted = {}
    for j, name in enumerate(catalog.objective_names):
        means, variances = predict_batch(state.models[j], point[None, :])
        predicted[name] = {
            "mean": float(-signs[j] * means[0]),
            "sd": float(np.sqrt(variances[0])),
        }
    payload["predicted"] = predicted
    return payload


def _suggestions_response(runtime: CampaignRuntime) -> dict:
    signs = runtime.state.signs
    return {
        "campaign_id": runtime.handle_id,
        "iteration": runtime.state.iteration,
        "status": runtime.state.status,
        "suggestions": [
            _suggestion_payload(r, runtime, signs) for r in runtime.state.pending
        ],
    }


def _build_report(runtime: CampaignRuntime) -> dict:
    state, catalog = runtime.state, runtime.catalog
    evaluated = [
        {
            "catalog_index": int(idx),
            "values": [float(v) for v in state.observed_objectives[pos]],
        }
        for pos, idx in enumerate(state.evaluated_indices)
    ] if state.observed_objectives is not None else []

    if state.trace:
        front_positions = [int(i) for i in state.trace[-1].front_indices]
        front = {
            "positions": front_positions,
            "catalog_indices": [int(state.evaluated_indices[i]) for i in front_positions],
        }
    else:
        front = {"positions": [], "catalog_indices": []}

    predictions = None
    if state.models is not None:
        signs = state.signs
        matrix = scale_inputs(catalog).matrix
        per_objective = []
        for j in range(len(catalog.objective_names)):
            means, variances = predict_batch(state.models[j], matrix)
            per_objective.append((-signs[j] * means, np.sqrt(variances)))
        evaluated_set = set(state.evaluated_indices)
        predictions = [
            {
                "catalog_index": i,
                "means": [float(per_objective[j][0][i]) for j in range(len(per_objective))],
                "sds": [float(per_objective[j][1][i]) for j in range(len(per_objective))],
                "evaluated": i in evaluated_set,
            }
            for i in range(catalog.row_count)
        ]

    return {
        "campaign_id": runtime.handle_id,
        "created_at": runtime.created_at,
        "status": state.status,
        "mode": runtime.config.mode,
        "iteration": state.iteration,
        "feature_names": list(catalog.feature_names),
        "objective_names": list(catalog.objective_names),
        "directions": list(state.directions),
        "catalog_rows": catalog.row_count,
        "config": runtime.config.as_dict(),
        "trace": [r.as_dict() for r in state.trace],
        "evaluated": evaluated,
        "front": front,
        "pending_count": len(state.pending),
        "predictions": predictions,
    }


def create_app(data_dir) -> FastAPI:
    """Application factory; all campaign files live under data_dir."""
    registry = CampaignRegistry(Path(data_dir))
    app = FastAPI(title="paretopool", version="0.1.0")
    app.state.registry = registry
    # the dashboard is served from its own origin; single-user lab tool, no
    # credentials, so a blanket allowance is fine
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/campaigns", status_code=201)
    def create_campaign(request: CreateCampaignRequest) -> dict:
        try:
            catalog = _resolve_catalog(request.catalog)
            config = CampaignConfig.from_dict(request.config)
            runtime = registry.create(catalog, config)
        except ParetoPoolError as exc:
            raise _to_http(exc) from exc
        except TypeError as exc:
            raise HTTPException(status_code=422, detail=f"bad config: {exc}") from exc
        return runtime.handle()

    @app.get("/campaigns")
    def list_campaigns() -> list[dict]:
        return registry.list()

    @app.get("/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str) -> dict:
        return registry.get(campaign_id).handle()

    @app.get("/campaigns/{campaign_id}/suggestions")
    def get_suggestions(campaign_id: str) -> JSONResponse:
        runtime = registry.get(campaign_id)
        with runtime.lock:
            state = runtime.state
            if not state.pending:
                if runtime.config.mode == SIMULATION:
                    raise HTTPException(
                        status_code=409,
                        detail="simulation campaigns advance via POST /run",
                    )
                if state.status != RUNNING:
                    raise HTTPException(
                        status_code=409, detail=f"campaign is {state.status}"
                    )
                try:
                    step(state, runtime.catalog, runtime.config)
                except ParetoPoolError as exc:
                    raise _to_http(exc) from exc
                registry.persist(runtime)
            return JSONResponse(_suggestions_response(runtime))

    @app.post("/campaigns/{campaign_id}/observations")
    def post_observation(campaign_id: str, request: ObservationRequest) -> dict:
        runtime = registry.get(campaign_id)
        with runtime.lock:
            state = runtime.state
            try:
                submit_observation(
                    state, runtime.catalog, runtime.config,
                    request.snapped_index, request.values,
                )
            except ParetoPoolError as exc:
                raise _to_http(exc) from exc
            registry.persist(runtime)
            batch_complete = not state.pending
            return {
                "campaign_id": runtime.handle_id,
                "iteration": state.iteration,
                "status": state.status,
                "pending_remaining": sum(
                    1 for r in state.pending if r.resolved_values is None
                ),
                "report": state.trace[-1].as_dict() if batch_complete and state.trace else None,
            }

    @app.get("/campaigns/{campaign_id}/report")
    def get_report(campaign_id: str) -> JSONResponse:
        runtime = registry.get(campaign_id)
        with runtime.lock:
            return JSONResponse(_build_report(runtime))

    @app.post("/campaigns/{campaign_id}/run")
    def run_campaign(campaign_id: str) -> dict:
        runtime = registry.get(campaign_id)
        with runtime.lock:
            if runtime.config.mode != SIMULATION:
                raise HTTPException(
                    status_code=409, detail="only simulation campaigns can be run"
                )
            state = runtime.state
            steps = 0
            while state.status == RUNNING:
                try:
                    step(state, runtime.catalog, runtime.config)
                except ParetoPoolError as exc:
                    raise _to_http(exc) from exc
                registry.persist(runtime)
                steps += 1
            return {
                "campaign_id": runtime.handle_id,
                "status": state.status,
                "iteration": state.iteration,
                "steps_executed": steps,
                "evaluated_count": len(state.evaluated_indices),
                "final_report": state.trace[-1].as_dict(),
            }

    return app
