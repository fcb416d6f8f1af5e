"""End-to-end concept embedding build plus the on-disk format."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .completion import DEFAULT_ITERS, DEFAULT_RANK, nmf_complete
from .fusion import DEFAULT_K, DEFAULT_RIDGE, ConceptEmbedding, gcca_fuse, standardize_columns
from .graphdata import LinkGraph
from .views import DEFAULT_MIN_SUPPORT, RelatednessView, build_views, shift_nonnegative

_EMB_FORMAT = "facetseg-concepts"


@dataclass
class ConceptConfig:
    rank: int = DEFAULT_RANK
    iters: int = DEFAULT_ITERS
    k: int = DEFAULT_K
    ridge: float = DEFAULT_RIDGE
    min_support: int = DEFAULT_MIN_SUPPORT
    seed: int = 0
    views: tuple[str, ...] = ()   # empty = every view with observations


def build_concept_embedding(
    graph: LinkGraph,
    text_vectors: dict[str, np.ndarray] | None = None,
    config: ConceptConfig | None = None,
) -> tuple[ConceptEmbedding, list[RelatednessView]]:
    """Views -> shift -> masked NMF completion -> z-score -> fusion."""
    cfg = config or ConceptConfig()
    views = build_views(graph, text_vectors, min_support=cfg.min_support)
    if cfg.views:
        views = [v for v in views if v.name in cfg.views]

    completed = []
    used = []
    for view in views:
        if not view.mask.any():
            warnings.warn(f"view {view.name} has no observations; skipped", stacklevel=2)
            continue
        shifted = shift_nonnegative(view)
        result = nmf_complete(shifted, rank=cfg.rank, iters=cfg.iters, seed=cfg.seed)
        completed.append(standardize_columns(result.completed))
        used.append(view)
    if not completed:
        raise ValueError("no usable views")

    emb = gcca_fuse(completed, k=cfg.k, ridge=cfg.ridge, ids=graph.sorted_entities())
    return emb, used


def save_embedding_file(emb: ConceptEmbedding, path: str | Path) -> None:
    payload = {
        "format": _EMB_FORMAT,
        "version": 1,
        "ids": emb.ids,
        "k": emb.k,
        "eigenvalues": emb.eigenvalues.tolist(),
        "g": emb.G.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8")


def load_embedding_file(path: str | Path) -> ConceptEmbedding:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != _EMB_FORMAT:
        raise ValueError(f"{path}: not a concept embedding file")
    return ConceptEmbedding(
        ids=list(payload["ids"]),
        G=np.asarray(payload["g"], dtype=np.float64),
        eigenvalues=np.asarray(payload["eigenvalues"], dtype=np.float64),
    )
