"""Concept graph: cosine-similarity edges over embedding rows."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fusion import ConceptEmbedding

DEFAULT_THETA = 0.6


@dataclass(frozen=True)
class ConceptEdge:
    src: str
    dst: str
    weight: float


def cosine_graph(emb: ConceptEmbedding, theta: float = DEFAULT_THETA) -> list[ConceptEdge]:
    """Edges for concept pairs with cosine similarity >= theta.

    Zero rows cannot be normalized and are skipped with a warning. Each
    undirected pair appears once, src < dst, ordered by descending weight
    then ids.
    """
    norms = np.linalg.norm(emb.G, axis=1)
    zero = norms == 0.0
    if zero.any():
        warnings.warn(f"{int(zero.sum())} zero embedding rows excluded", stacklevel=2)
    keep = np.flatnonzero(~zero)
    unit = emb.G[keep] / norms[keep, None]
    sims = np.clip(unit @ unit.T, -1.0, 1.0)
    edges = []
    for a in range(len(keep)):
        for b in range(a + 1, len(keep)):
            w = float(sims[a, b])
            if w >= theta:
                ia, ib = emb.ids[keep[a]], emb.ids[keep[b]]
                src, dst = (ia, ib) if ia < ib else (ib, ia)
                edges.append(ConceptEdge(src=src, dst=dst, weight=w))
    edges.sort(key=lambda e: (-e.weight, e.src, e.dst))
    return edges
