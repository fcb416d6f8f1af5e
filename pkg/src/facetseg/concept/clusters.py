"""Label clustering over embedding rows, awaiting human validation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_THETA_C = 0.75

CLUSTER_STATUSES = ("proposed", "approved", "rejected", "merged")


@dataclass
class LabelCluster:
    cluster_id: str
    members: list[str]
    status: str = "proposed"
    merged_into: str | None = None

    def __post_init__(self):
        if self.status not in CLUSTER_STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if not self.members:
            raise ValueError("empty cluster")
        self.members = sorted(self.members)

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "members": self.members,
            "status": self.status,
            "merged_into": self.merged_into,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabelCluster":
        return cls(
            cluster_id=d["cluster_id"],
            members=list(d["members"]),
            status=d.get("status", "proposed"),
            merged_into=d.get("merged_into"),
        )


def cluster_labels(
    label_ids: list[str],
    vectors: np.ndarray,
    theta_c: float = DEFAULT_THETA_C,
    generation: int = 0,
) -> list[LabelCluster]:
    """Average-linkage agglomeration on cosine distance, cut at 1 - theta_c.

    Hand-rolled so the merge order is fully pinned: equal-distance merges
    break ties by the lexicographically smallest member-id signature. The
    output partitions the label set, every cluster proposed.
    """
    if len(label_ids) == 0:
        raise ValueError("need at least one label")
    if len(set(label_ids)) != len(label_ids):
        raise ValueError("duplicate label ids")
    V = np.asarray(vectors, dtype=np.float64)
    if V.shape[0] != len(label_ids):
        raise ValueError("vector count does not match labels")

    norms = np.linalg.norm(V, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = V / safe[:, None]
    dist = 1.0 - np.clip(unit @ unit.T, -1.0, 1.0)
    cutoff = 1.0 - theta_c

    clusters: list[list[int]] = [[i] for i in range(len(label_ids))]

    def signature(cluster: list[int]) -> tuple[str, ...]:
        return tuple(sorted(label_ids[i] for i in cluster))

    def linkage(a: list[int], b: list[int]) -> float:
        return float(np.mean([dist[i, j] for i in a for j in b]))

    while len(clusters) > 1:
        best = None
        best_key = None
        for x in range(len(clusters)):
            for y in range(x + 1, len(clusters)):
                d = linkage(clusters[x], clusters[y])
                sig_pair = sorted((signature(clusters[x]), signature(clusters[y])))
                key = (d, sig_pair[0], sig_pair[1])
                if best_key is None or key < best_key:
                    best_key = key
                    best = (x, y)
        if best_key[0] > cutoff:
            break
        x, y = best
        merged = clusters[x] + clusters[y]
        clusters = [c for i, c in enumerate(clusters) if i not in (x, y)]
        clusters.append(merged)

    clusters.sort(key=signature)
    return [
        LabelCluster(
            cluster_id=f"g{generation}-{idx:03d}",
            members=[label_ids[i] for i in cluster],
        )
        for idx, cluster in enumerate(clusters)
    ]
