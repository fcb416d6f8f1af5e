"""HTTP JSON service binding ingestion, classification, concepts, and leads."""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request

from ..corpus import CorpusFormatError
from . import state as st
from .schemas import (
    ClassifyRequest,
    ClusterDecisionRequest,
    ClusterModel,
    CompanyDetail,
    ConceptGraphResponse,
    GraphEdgeModel,
    IngestReportModel,
    LabelSpaces,
    LeadItem,
    LeadsResponse,
    NeighborItem,
    NeighborsResponse,
    PagePredictionModel,
    SitePredictionModel,
)


def create_app(app_state: st.AppState) -> FastAPI:
    app = FastAPI(title="facetseg", version="0.1.0")
    app.state.core = app_state

    @app.post("/ingest", response_model=IngestReportModel)
    async def ingest(request: Request):
        body = (await request.body()).decode("utf-8")
        stripped = body.strip()
        if not stripped:
            raise HTTPException(status_code=400, detail="empty body")
        # a single JSON object with "path" is a file reference, anything
        # else is inline corpus JSONL
        if stripped.startswith("{") and "\n" not in stripped:
            try:
                maybe = json.loads(stripped)
            except json.JSONDecodeError:
                maybe = None
            if isinstance(maybe, dict) and set(maybe) == {"path"}:
                path = Path(maybe["path"])
                if not path.exists():
                    raise HTTPException(status_code=400, detail=f"no such file: {path}")
                body = path.read_text(encoding="utf-8")
        try:
            report = app_state.ingest_text(body)
        except CorpusFormatError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if report.rejected:
            raise HTTPException(status_code=409, detail={"reason": "stale sequence", "report": report.to_dict()})
        return IngestReportModel(**report.to_dict())

    @app.post("/classify", response_model=SitePredictionModel)
    def classify(req: ClassifyRequest):
        try:
            site, probs = app_state.classify(req.domain, req.facet)
        except st.UnknownFacetError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except st.DomainNotIngestedError:
            raise HTTPException(status_code=404, detail=f"unknown domain {req.domain!r}")
        except st.ModelNotLoadedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except st.NoUsablePagesError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        spec = app_state.models[req.facet].facet
        return SitePredictionModel(
            domain=req.domain,
            facet=req.facet,
            probs=probs,
            per_page=[
                PagePredictionModel(url=p.url, probs={l: float(x) for l, x in zip(spec.labels, p.probs)})
                for p in site.per_page
            ],
        )

    @app.get("/leads", response_model=LeadsResponse)
    def leads(
        industries: str = "",
        roles: str = "",
        min_prob: float = Query(default=0.5, ge=0.0, le=1.0),
        limit: int = Query(default=50, ge=1),
    ):
        ind = [x for x in industries.split(",") if x]
        rol = [x for x in roles.split(",") if x]
        try:
            hits = app_state.leads(ind, rol, min_prob, limit)
        except (st.EmptyQueryError, st.UnknownLabelError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return LeadsResponse(
            industries=ind,
            roles=rol,
            min_prob=min_prob,
            leads=[LeadItem(domain=d, score=s, probs=p) for d, s, p in hits],
        )

    @app.get("/companies/{domain}", response_model=CompanyDetail)
    def company(domain: str):
        from ..kg import NodeNotFoundError

        try:
            return CompanyDetail(**app_state.company_detail(domain))
        except NodeNotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown domain {domain!r}")

    @app.get("/labels", response_model=LabelSpaces)
    def labels():
        spaces = {}
        for facet, params in app_state.models.items():
            spaces[facet] = list(params.facet.labels)
        return LabelSpaces(**spaces)

    @app.get("/concepts/graph", response_model=ConceptGraphResponse)
    def concepts_graph(theta: float = Query(default=0.6, ge=-1.0, le=1.0)):
        try:
            nodes, edges = app_state.concept_graph(theta)
        except st.EmbeddingNotBuiltError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return ConceptGraphResponse(
            theta=theta,
            nodes=nodes,
            edges=[GraphEdgeModel(src=e.src, dst=e.dst, weight=e.weight) for e in edges],
        )

    @app.get("/concepts/{concept_id}/neighbors", response_model=NeighborsResponse)
    def concept_neighbors(
        concept_id: str,
        theta: float = Query(default=0.0, ge=-1.0, le=1.0),
        limit: int = Query(default=10, ge=1),
    ):
        try:
            pairs = app_state.concept_neighbors(concept_id, theta, limit)
        except st.EmbeddingNotBuiltError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown concept {concept_id!r}")
        return NeighborsResponse(
            concept=concept_id,
            neighbors=[NeighborItem(concept=c, weight=w) for c, w in pairs],
        )

    @app.get("/clusters", response_model=list[ClusterModel])
    def clusters():
        ordered = sorted(app_state.clusters.values(), key=lambda c: c.cluster_id)
        return [ClusterModel(**c.to_dict()) for c in ordered]

    @app.post("/clusters/{cluster_id}/decision", response_model=ClusterModel)
    def decide(cluster_id: str, req: ClusterDecisionRequest):
        try:
            cluster = app_state.decide_cluster(cluster_id, req.status, req.merge_into, req.actor)
        except st.ClusterNotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown cluster {cluster_id!r}")
        except st.ClusterAlreadyDecidedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except st.BadDecisionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return ClusterModel(**cluster.to_dict())

    @app.get("/healthz")
    def health():
        return {
            "status": "ok",
            "models": sorted(app_state.models),
            "concepts": app_state.concept_embedding is not None,
            "clusters": len(app_state.clusters),
        }

    ui_dir = app_state.config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def create_app_from_config(path: str | Path) -> FastAPI:
    return create_app(st.AppState(st.ServiceConfig.from_file(path)))
