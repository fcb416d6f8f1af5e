"""Matrix completion by masked non-negative factorization.

Multiplicative updates minimize the Frobenius error over observed entries
only; the product of the learned factors fills in the rest. The masked
loss is non-increasing every iteration, which callers may assert from the
recorded history.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .views import RelatednessView

DEFAULT_RANK = 10
DEFAULT_ITERS = 500
_EPS = 1e-12


@dataclass
class NmfResult:
    completed: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    loss_history: list[float]


def masked_loss(R: np.ndarray, mask: np.ndarray, PQ: np.ndarray) -> float:
    diff = np.where(mask, R - PQ, 0.0)
    return float(np.sum(diff * diff))


def nmf_complete(
    view: RelatednessView,
    rank: int = DEFAULT_RANK,
    iters: int = DEFAULT_ITERS,
    seed: int = 0,
    init: tuple[np.ndarray, np.ndarray] | None = None,
) -> NmfResult:
    """Complete a masked view with rank-``rank`` non-negative factors.

    Initialization is uniform on (0, 1] from the seed unless ``init``
    supplies explicit factors. Observed entries must be non-negative
    (shift the view first if a measure can go below zero).
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    R = np.asarray(view.matrix, dtype=np.float64)
    mask = np.asarray(view.mask, dtype=bool)
    if not mask.any():
        raise ValueError(f"view {view.name}: no observed entries")
    if float(R[mask].min()) < 0.0:
        raise ValueError(f"view {view.name}: negative observed entries; shift first")

    n, m = R.shape
    if init is not None:
        P = np.array(init[0], dtype=np.float64)
        Q = np.array(init[1], dtype=np.float64)
        if P.shape != (n, rank) or Q.shape != (rank, m):
            raise ValueError("init factor shapes do not match")
    else:
        rng = np.random.default_rng(seed)
        P = 1.0 - rng.random((n, rank))      # uniform on (0, 1]
        Q = 1.0 - rng.random((rank, m))

    M = mask.astype(np.float64)
    MR = M * R
    history = [masked_loss(R, mask, P @ Q)]
    for _ in range(iters):
        PQ = P @ Q
        P *= (MR @ Q.T) / ((M * PQ) @ Q.T + _EPS)
        PQ = P @ Q
        Q *= (P.T @ MR) / (P.T @ (M * PQ) + _EPS)
        history.append(masked_loss(R, mask, P @ Q))
    return NmfResult(completed=P @ Q, P=P, Q=Q, loss_history=history)
