"""Pairwise entity relatedness from shared inlinks.

All measures take entity ids plus the link graph and work on the inlink
sets A, B and the total entity count W. Natural logarithms throughout.
"""

from __future__ import annotations

import math

from .graphdata import LinkGraph


class DegenerateGraphError(ValueError):
    pass


def _sets(a: str, b: str, g: LinkGraph) -> tuple[set[str], set[str], int]:
    return g.inlink_set(a), g.inlink_set(b), g.W


def _require_nonempty(A: set, B: set) -> None:
    if not A or not B:
        raise ValueError("measure needs non-empty inlink sets")


def _require_w(W: int, A: set, B: set) -> None:
    if W <= min(len(A), len(B)):
        raise DegenerateGraphError(f"degenerate graph: W={W} <= min inlink count")


def milne_witten(a: str, b: str, g: LinkGraph) -> float:
    """1 - (ln max(|A|,|B|) - ln |A∩B|) / (ln W - ln min(|A|,|B|)), in [0,1]."""
    A, B, W = _sets(a, b, g)
    _require_nonempty(A, B)
    _require_w(W, A, B)
    inter = len(A & B)
    if inter == 0:
        return 0.0
    value = 1.0 - (math.log(max(len(A), len(B))) - math.log(inter)) / (
        math.log(W) - math.log(min(len(A), len(B)))
    )
    return max(0.0, value)


def jaccard(a: str, b: str, g: LinkGraph) -> float:
    """|A∩B| / |A∪B|; 0 when both sets are empty."""
    A, B, _ = _sets(a, b, g)
    union = len(A | B)
    if union == 0:
        return 0.0
    return len(A & B) / union


def cond_prob(a: str, b: str, g: LinkGraph) -> float:
    """|A∩B| / |A|: probability of hitting b's inlinks given a's. Asymmetric."""
    A, B, _ = _sets(a, b, g)
    if not A:
        raise ValueError(f"no inlinks for {a!r}")
    return len(A & B) / len(A)


def pmi(a: str, b: str, g: LinkGraph) -> float:
    """ln(|A∩B| W / (|A| |B|)); 0 at empty intersection by convention."""
    A, B, W = _sets(a, b, g)
    _require_nonempty(A, B)
    _require_w(W, A, B)
    inter = len(A & B)
    if inter == 0:
        return 0.0
    return math.log(inter * W / (len(A) * len(B)))


def barabasi_albert(a: str, b: str, g: LinkGraph) -> float:
    """Observed co-links over the degree-proportional expectation, capped at 1."""
    A, B, W = _sets(a, b, g)
    _require_nonempty(A, B)
    _require_w(W, A, B)
    inter = len(A & B)
    if inter == 0:
        return 0.0
    return min(1.0, inter * W / (len(A) * len(B)))
