"""Request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class IngestReportModel(BaseModel):
    inserted: int = 0
    updated: int = 0
    unchanged: int = 0
    rejected: int = 0


class ClassifyRequest(BaseModel):
    domain: str
    facet: str


class PagePredictionModel(BaseModel):
    url: str
    probs: dict[str, float]


class SitePredictionModel(BaseModel):
    domain: str
    facet: str
    probs: dict[str, float]
    per_page: list[PagePredictionModel]


class LeadItem(BaseModel):
    domain: str
    score: float
    probs: dict[str, float]


class LeadsResponse(BaseModel):
    industries: list[str]
    roles: list[str]
    min_prob: float
    leads: list[LeadItem]


class GraphEdgeModel(BaseModel):
    src: str
    dst: str
    weight: float


class ConceptGraphResponse(BaseModel):
    theta: float
    nodes: list[str]
    edges: list[GraphEdgeModel]


class NeighborItem(BaseModel):
    concept: str
    weight: float


class NeighborsResponse(BaseModel):
    concept: str
    neighbors: list[NeighborItem]


class ClusterModel(BaseModel):
    cluster_id: str
    members: list[str]
    status: str
    merged_into: str | None = None


class ClusterDecisionRequest(BaseModel):
    status: str = Field(pattern="^(approved|rejected|merged)$")
    merge_into: str | None = None
    actor: str = "analyst"


class CompanyDetail(BaseModel):
    domain: str
    pages: list[str]
    labels: dict[str, list[str]]
    predictions: dict[str, dict[str, float]]


class LabelSpaces(BaseModel):
    industry: list[str] = []
    role: list[str] = []
