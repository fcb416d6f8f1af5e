"""Multi-view fusion: a shared orthonormal embedding over completed views.

Solves min over G, U_j of the total reconstruction error sum_j
||G - X_j U_j||_F^2 subject to G'G = I: G collects the top-k eigenvectors
of sum_j X_j (X_j'X_j + rI)^(-1) X_j', and each view's loading maps it
back into that view.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_K = 16
DEFAULT_RIDGE = 1e-6


@dataclass
class ConceptEmbedding:
    ids: list[str]
    G: np.ndarray                     # (n, k), orthonormal columns
    eigenvalues: np.ndarray           # (k,), non-increasing
    loadings: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        n, k = self.G.shape
        if len(self.ids) != n:
            raise ValueError("id count does not match embedding rows")
        gram = self.G.T @ self.G
        if not np.allclose(gram, np.eye(k), atol=1e-8):
            raise ValueError("embedding columns are not orthonormal")

    @property
    def k(self) -> int:
        return self.G.shape[1]

    def row(self, concept_id: str) -> np.ndarray:
        return self.G[self.ids.index(concept_id)]


def standardize_columns(X: np.ndarray) -> np.ndarray:
    """Z-score per column; constant columns become zeros."""
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (X - mean) / std


def _fix_signs(G: np.ndarray) -> np.ndarray:
    out = G.copy()
    for j in range(out.shape[1]):
        anchor = np.argmax(np.abs(out[:, j]))   # first maximal on ties
        if out[anchor, j] < 0:
            out[:, j] = -out[:, j]
    return out


def gcca_fuse(
    views: list[np.ndarray],
    k: int = DEFAULT_K,
    ridge: float = DEFAULT_RIDGE,
    ids: list[str] | None = None,
) -> ConceptEmbedding:
    """Fuse column-standardized views into one n x k embedding.

    Eigenvectors come ordered by descending eigenvalue with each column's
    largest-magnitude entry made positive, so results are deterministic.
    """
    if not views:
        raise ValueError("no views")
    n = views[0].shape[0]
    if any(v.shape[0] != n for v in views):
        raise ValueError("views disagree on row count")
    if k > n:
        raise ValueError(f"k={k} exceeds row count {n}")
    for j, v in enumerate(views):
        if not np.isfinite(v).all():
            raise ValueError(f"view {j}: non-finite entries")

    M = np.zeros((n, n))
    solvers = []
    for X in views:
        X = np.asarray(X, dtype=np.float64)
        gram = X.T @ X + ridge * np.eye(X.shape[1])
        inv_xt = np.linalg.pinv(gram) @ X.T
        solvers.append(inv_xt)
        M += X @ inv_xt

    eigenvalues, eigenvectors = np.linalg.eigh((M + M.T) / 2.0)
    order = np.argsort(eigenvalues)[::-1][:k]
    G = _fix_signs(eigenvectors[:, order])
    loadings = [solver @ G for solver in solvers]
    return ConceptEmbedding(
        ids=ids if ids is not None else [str(i) for i in range(n)],
        G=G,
        eigenvalues=eigenvalues[order],
        loadings=loadings,
    )


def reconstruction_residual(emb: ConceptEmbedding, views: list[np.ndarray]) -> float:
    """sum_j ||G - X_j U_j||_F^2 for the fitted loadings."""
    total = 0.0
    for X, U in zip(views, emb.loadings):
        diff = emb.G - X @ U
        total += float(np.sum(diff * diff))
    return total
