"""Per-measure relatedness matrices with observed-entry masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphdata import LinkGraph
from .measures import barabasi_albert, cond_prob, jaccard, milne_witten, pmi

MEASURE_NAMES = (
    "milne_witten",
    "jaccard",
    "cond_prob",
    "barabasi_albert",
    "pmi",
    "text_cosine",
    "cooccurrence",
)

SYMMETRIC_MEASURES = frozenset(MEASURE_NAMES) - {"cond_prob"}
BOUNDED_MEASURES = frozenset(MEASURE_NAMES) - {"pmi"}

_LINK_MEASURES = {
    "milne_witten": milne_witten,
    "jaccard": jaccard,
    "cond_prob": cond_prob,
    "barabasi_albert": barabasi_albert,
    "pmi": pmi,
}

DEFAULT_MIN_SUPPORT = 3


@dataclass
class RelatednessView:
    name: str
    entities: list[str]
    matrix: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        n = len(self.entities)
        if self.matrix.shape != (n, n) or self.mask.shape != (n, n):
            raise ValueError(f"view {self.name}: shape mismatch")
        if not np.isfinite(self.matrix[self.mask]).all():
            raise ValueError(f"view {self.name}: non-finite observed entries")
        if self.name in SYMMETRIC_MEASURES:
            both = self.mask & self.mask.T
            if not np.allclose(self.matrix[both], self.matrix.T[both]):
                raise ValueError(f"view {self.name}: asymmetric observed entries")

    def observed_count(self) -> int:
        return int(self.mask.sum())


def _pair_observed(g: LinkGraph, A: set, B: set, min_support: int) -> bool:
    if not A or not B:
        return False
    if A & B:
        return True
    return len(A) >= min_support and len(B) >= min_support


def build_views(
    g: LinkGraph,
    text_vectors: dict[str, np.ndarray] | None = None,
    observed_pairs: set[tuple[str, str]] | None = None,
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> list[RelatednessView]:
    """One masked n x n view per measure over the graph's sorted entities.

    Link-measure pairs count as observed when they share inlink evidence or
    both ends have at least ``min_support`` inlinks (an explicit
    ``observed_pairs`` set overrides the rule). Diagonals carry each bounded
    measure's self-similarity of 1; the PMI diagonal is masked. Entities
    without a text vector are masked out of the text view, and entities
    without co-occurrence counts out of the co-occurrence view.
    """
    entities = g.sorted_entities()
    n = len(entities)
    index = {e: i for i, e in enumerate(entities)}
    text_vectors = text_vectors or {}

    views = []
    inl = [g.inlink_set(e) for e in entities]

    def explicit(i: int, j: int) -> bool:
        return (entities[i], entities[j]) in observed_pairs or (
            entities[j],
            entities[i],
        ) in observed_pairs

    for name in ("milne_witten", "jaccard", "cond_prob", "barabasi_albert", "pmi"):
        fn = _LINK_MEASURES[name]
        matrix = np.zeros((n, n))
        mask = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                if observed_pairs is not None:
                    seen = explicit(i, j) and bool(inl[i]) and bool(inl[j])
                else:
                    seen = _pair_observed(g, inl[i], inl[j], min_support)
                if not seen:
                    continue
                mask[i, j] = mask[j, i] = True
                if name == "cond_prob":
                    matrix[i, j] = fn(entities[i], entities[j], g)
                    matrix[j, i] = fn(entities[j], entities[i], g)
                else:
                    matrix[i, j] = matrix[j, i] = fn(entities[i], entities[j], g)
        if name != "pmi":
            np.fill_diagonal(matrix, 1.0)
            np.fill_diagonal(mask, True)
        views.append(RelatednessView(name=name, entities=entities, matrix=matrix, mask=mask))

    views.append(_text_view(entities, index, text_vectors))
    views.append(_cooccurrence_view(g, entities, index))
    return views


def _text_view(entities, index, text_vectors) -> RelatednessView:
    n = len(entities)
    matrix = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    have = []
    for e in entities:
        v = text_vectors.get(e)
        if v is None:
            continue
        norm = float(np.linalg.norm(v))
        if norm > 0:
            have.append((index[e], np.asarray(v, dtype=np.float64) / norm))
    for pos, (i, vi) in enumerate(have):
        matrix[i, i] = 1.0
        mask[i, i] = True
        for j, vj in have[pos + 1:]:
            c = float(vi @ vj)
            matrix[i, j] = matrix[j, i] = c
            mask[i, j] = mask[j, i] = True
    return RelatednessView(name="text_cosine", entities=entities, matrix=matrix, mask=mask)


def _cooccurrence_view(g: LinkGraph, entities, index) -> RelatednessView:
    """Lift industry x product counts to entity pairs through shared
    products (industries) or shared industries (products)."""
    n = len(entities)
    matrix = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    industries = [i for i in g.industries() if i in index]
    products = [p for p in g.products() if p in index]
    if not industries or not products:
        return RelatednessView(name="cooccurrence", entities=entities, matrix=matrix, mask=mask)

    counts = np.zeros((len(industries), len(products)))
    ipos = {e: i for i, e in enumerate(industries)}
    ppos = {e: i for i, e in enumerate(products)}
    for (ind, prod), c in g.cooc.items():
        if ind in ipos and prod in ppos:
            counts[ipos[ind], ppos[prod]] = c

    row_sums = counts.sum(axis=1, keepdims=True)
    col_sums = counts.sum(axis=0, keepdims=True)
    rows = np.divide(counts, row_sums, out=np.zeros_like(counts), where=row_sums > 0)
    cols = np.divide(counts, col_sums, out=np.zeros_like(counts), where=col_sums > 0)

    ind_sim = rows @ rows.T
    prod_sim = cols.T @ cols

    for a, ea in enumerate(industries):
        ia = index[ea]
        if row_sums[a, 0] == 0:
            continue
        matrix[ia, ia] = 1.0
        mask[ia, ia] = True
        for b in range(a + 1, len(industries)):
            if row_sums[b, 0] == 0:
                continue
            ib = index[industries[b]]
            matrix[ia, ib] = matrix[ib, ia] = ind_sim[a, b]
            mask[ia, ib] = mask[ib, ia] = True
    for a, ea in enumerate(products):
        pa = index[ea]
        if col_sums[0, a] == 0:
            continue
        matrix[pa, pa] = 1.0
        mask[pa, pa] = True
        for b in range(a + 1, len(products)):
            if col_sums[0, b] == 0:
                continue
            pb = index[products[b]]
            matrix[pa, pb] = matrix[pb, pa] = prod_sim[a, b]
            mask[pa, pb] = mask[pb, pa] = True
    for (ind, prod), c in g.cooc.items():
        if c <= 0 or ind not in ipos or prod not in ppos:
            continue
        ii, pp = index[ind], index[prod]
        value = rows[ipos[ind], ppos[prod]]
        matrix[ii, pp] = matrix[pp, ii] = value
        mask[ii, pp] = mask[pp, ii] = True
    return RelatednessView(name="cooccurrence", entities=entities, matrix=matrix, mask=mask)


def shift_nonnegative(view: RelatednessView) -> RelatednessView:
    """Shift observed entries by their minimum when any are negative.

    Factorization requires a non-negative target; the PMI and text views can
    go below zero. The completed matrix then lives in the shifted space,
    which the later column standardization re-centers anyway.
    """
    if not view.mask.any():
        return view
    low = float(view.matrix[view.mask].min())
    if low >= 0.0:
        return view
    matrix = view.matrix.copy()
    matrix[view.mask] -= low
    return RelatednessView(name=view.name, entities=view.entities, matrix=matrix, mask=view.mask)
