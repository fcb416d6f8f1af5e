"""Embedded knowledge graph: idempotent upsert over an ordered event stream.

A single-process store with a write-ahead log stands in for a distributed
graph/queue stack while keeping the same contracts: per-key event ordering,
at-least-once delivery tolerance, and deterministic replay to a canonical
snapshot.
"""

from __future__ import annotations

import hashlib
import json
import struct
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

NODE_KINDS = ("company", "page", "label", "concept")
EDGE_KINDS = ("has_page", "labeled_as", "related_to", "member_of_cluster")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class UpsertOutcome(str, Enum):
    INSERTED = "inserted"
    UPDATED = "updated"
    UNCHANGED = "unchanged"


class StaleEventError(ValueError):
    pass


class NodeNotFoundError(KeyError):
    pass


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


@dataclass
class EntityNode:
    id: str
    kind: str
    attributes: dict
    content_hash: int = 0
    version: int = 1

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        for key, value in self.attributes.items():
            if value is not None and not isinstance(value, (str, int, float, bool)):
                raise ValueError(f"attribute {key!r} is not a scalar")


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    kind: str
    weight: float | None = None

    def __post_init__(self):
        if self.kind not in EDGE_KINDS:
            raise ValueError(f"unknown edge kind {self.kind!r}")
        if self.kind == "related_to" and self.weight is None:
            raise ValueError("related_to edges carry a weight")
        if self.weight is not None and not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"edge weight {self.weight} outside [0,1]")


@dataclass
class UpsertEvent:
    """Snapshot of one key: its primary node, child nodes, and owned edges."""

    key: str
    sequence: int
    node: EntityNode
    children: list[EntityNode] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def __post_init__(self):
        if self.node.id != self.key:
            raise ValueError(f"primary node id {self.node.id!r} != event key {self.key!r}")
        seen = set()
        for e in self.edges:
            k = (e.src, e.dst, e.kind)
            if k in seen:
                raise ValueError(f"duplicate edge {k}")
            seen.add(k)

    def content_hash(self) -> int:
        payload = {
            "attributes": self.node.attributes,
            "kind": self.node.kind,
            "children": sorted(
                ({"id": c.id, "kind": c.kind, "attributes": c.attributes} for c in self.children),
                key=lambda c: c["id"],
            ),
            "edges": sorted((e.src, e.dst, e.kind, e.weight) for e in self.edges),
        }
        return fnv1a_64(_canonical(payload).encode("utf-8"))

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "sequence": self.sequence,
            "node": {"id": self.node.id, "kind": self.node.kind, "attributes": self.node.attributes},
            "children": [
                {"id": c.id, "kind": c.kind, "attributes": c.attributes} for c in self.children
            ],
            "edges": [
                {"src": e.src, "dst": e.dst, "kind": e.kind, "weight": e.weight} for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UpsertEvent":
        return cls(
            key=d["key"],
            sequence=int(d["sequence"]),
            node=EntityNode(d["node"]["id"], d["node"]["kind"], dict(d["node"]["attributes"])),
            children=[EntityNode(c["id"], c["kind"], dict(c["attributes"])) for c in d.get("children", [])],
            edges=[
                Edge(e["src"], e["dst"], e["kind"], e.get("weight")) for e in d.get("edges", [])
            ],
        )


@dataclass
class IngestionReport:
    inserted: int = 0
    updated: int = 0
    unchanged: int = 0
    rejected: int = 0

    def to_dict(self) -> dict:
        return {
            "inserted": self.inserted,
            "updated": self.updated,
            "unchanged": self.unchanged,
            "rejected": self.rejected,
        }


class EventLog:
    """Append-only event log: 4-byte big-endian length prefix + JSON payload."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, event: UpsertEvent) -> None:
        data = _canonical(event.to_dict()).encode("utf-8")
        with open(self.path, "ab") as fh:
            fh.write(struct.pack(">I", len(data)))
            fh.write(data)

    @staticmethod
    def read_events(path: str | Path) -> list[UpsertEvent]:
        """Read a log in either framing: length-prefixed or one JSON per line."""
        raw = Path(path).read_bytes()
        if not raw:
            return []
        if raw.lstrip()[:1] == b"{":
            return [
                UpsertEvent.from_dict(json.loads(line))
                for line in raw.decode("utf-8").splitlines()
                if line.strip()
            ]
        events = []
        offset = 0
        while offset < len(raw):
            if offset + 4 > len(raw):
                raise ValueError(f"truncated log at byte {offset}")
            (length,) = struct.unpack(">I", raw[offset : offset + 4])
            offset += 4
            if offset + length > len(raw):
                raise ValueError(f"truncated event at byte {offset}")
            events.append(UpsertEvent.from_dict(json.loads(raw[offset : offset + length])))
            offset += length
        return events


class KnowledgeGraph:
    """In-memory node/edge store with per-key versioned upserts.

    Reads may run concurrently with one writer; a single lock serializes
    mutations (per-key ordering is enforced by sequence numbers, so any
    interleaving across distinct keys converges to the same state).
    """

    def __init__(self, wal_path: str | Path | None = None):
        self._nodes: dict[str, EntityNode] = {}
        self._edges: dict[tuple[str, str, str], float | None] = {}
        self._out: dict[str, set[tuple[str, str, str]]] = {}
        self._owned_edges: dict[str, list[tuple[str, str, str]]] = {}
        self._owned_children: dict[str, list[str]] = {}
        self._last_seq: dict[str, int] = {}
        self._lock = threading.RLock()
        self._wal = EventLog(wal_path) if wal_path else None

    # -- queries ------------------------------------------------------------

    def node(self, node_id: str) -> EntityNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise NodeNotFoundError(f"not found: {node_id}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def nodes(self, kind: str | None = None) -> list[EntityNode]:
        with self._lock:
            out = [n for n in self._nodes.values() if kind is None or n.kind == kind]
        return sorted(out, key=lambda n: (n.kind, n.id))

    def edges(self) -> list[Edge]:
        with self._lock:
            items = list(self._edges.items())
        return sorted(
            (Edge(s, d, k, w) for (s, d, k), w in items),
            key=lambda e: (e.src, e.dst, e.kind),
        )

    def neighbors(self, node_id: str, kind: str, min_weight: float = 0.0) -> list[tuple[EntityNode, float]]:
        """Outgoing edges of a kind with weight >= min_weight (absent -> 1.0)."""
        self.node(node_id)
        hits = []
        with self._lock:
            out_edges = list(self._out.get(node_id, ()))
            for (src, dst, ekind) in out_edges:
                if ekind != kind:
                    continue
                weight = self._edges[(src, dst, ekind)]
                effective = 1.0 if weight is None else weight
                if effective >= min_weight and dst in self._nodes:
                    hits.append((self._nodes[dst], effective))
        hits.sort(key=lambda pair: (-pair[1], pair[0].id))
        return hits

    # -- mutations ----------------------------------------------------------

    def upsert(self, event: UpsertEvent) -> UpsertOutcome:
        with self._lock:
            last = self._last_seq.get(event.key)
            if last is not None and event.sequence < last:
                if self._wal:
                    self._wal.append(event)
                raise StaleEventError(
                    f"stale event for {event.key!r}: sequence {event.sequence} < {last}"
                )
            if self._wal:
                self._wal.append(event)
            new_hash = event.content_hash()
            existing = self._nodes.get(event.key)

            if existing is not None and existing.kind != event.node.kind:
                raise ValueError(
                    f"kind conflict for {event.key!r}: {existing.kind} vs {event.node.kind}"
                )

            self._last_seq[event.key] = max(event.sequence, last if last is not None else event.sequence)

            if existing is not None and existing.content_hash == new_hash:
                return UpsertOutcome.UNCHANGED

            outcome = UpsertOutcome.INSERTED if existing is None else UpsertOutcome.UPDATED
            version = 1 if existing is None else existing.version + 1
            self._nodes[event.key] = EntityNode(
                id=event.key,
                kind=event.node.kind,
                attributes=dict(event.node.attributes),
                content_hash=new_hash,
                version=version,
            )
            self._reconcile_children(event)
            self._reconcile_edges(event)
            return outcome

    def _reconcile_children(self, event: UpsertEvent) -> None:
        new_ids = {c.id for c in event.children}
        for old_id in self._owned_children.get(event.key, []):
            if old_id not in new_ids:
                self._nodes.pop(old_id, None)
        for child in event.children:
            child_hash = fnv1a_64(
                _canonical({"attributes": child.attributes, "kind": child.kind}).encode("utf-8")
            )
            old = self._nodes.get(child.id)
            if old is not None and old.content_hash == child_hash:
                continue
            version = 1 if old is None else old.version + 1
            self._nodes[child.id] = EntityNode(
                id=child.id,
                kind=child.kind,
                attributes=dict(child.attributes),
                content_hash=child_hash,
                version=version,
            )
        self._owned_children[event.key] = sorted(new_ids)

    def _reconcile_edges(self, event: UpsertEvent) -> None:
        for old_key in self._owned_edges.get(event.key, []):
            self._edges.pop(old_key, None)
            self._out.get(old_key[0], set()).discard(old_key)
        owned = []
        for edge in event.edges:
            key = (edge.src, edge.dst, edge.kind)
            self._edges[key] = edge.weight
            self._out.setdefault(edge.src, set()).add(key)
            owned.append(key)
        self._owned_edges[event.key] = owned

    def consume_stream(self, events) -> IngestionReport:
        """Apply an ordered event source; per-event rejections go in the report."""
        report = IngestionReport()
        for event in events:
            try:
                outcome = self.upsert(event)
            except StaleEventError:
                report.rejected += 1
                continue
            if outcome is UpsertOutcome.INSERTED:
                report.inserted += 1
            elif outcome is UpsertOutcome.UPDATED:
                report.updated += 1
            else:
                report.unchanged += 1
        return report

    # -- snapshots ----------------------------------------------------------

    def snapshot_bytes(self) -> bytes:
        """Canonical JSONL snapshot: nodes (sorted) then edges (sorted)."""
        lines = []
        for node in self.nodes():
            lines.append(
                _canonical(
                    {
                        "type": "node",
                        "id": node.id,
                        "kind": node.kind,
                        "attributes": node.attributes,
                        "content_hash": node.content_hash,
                        "version": node.version,
                    }
                )
            )
        for edge in self.edges():
            lines.append(
                _canonical(
                    {"type": "edge", "src": edge.src, "dst": edge.dst, "kind": edge.kind, "weight": edge.weight}
                )
            )
        return ("\n".join(lines) + "\n").encode("utf-8")

    def export_snapshot(self, path: str | Path) -> None:
        Path(path).write_bytes(self.snapshot_bytes())

    def snapshot_hash(self) -> str:
        return hashlib.sha256(self.snapshot_bytes()).hexdigest()


def replay(log_path: str | Path, wal_path: str | Path | None = None) -> tuple[KnowledgeGraph, IngestionReport]:
    """Rebuild a store from an event log; deterministic snapshot guaranteed."""
    graph = KnowledgeGraph(wal_path=wal_path)
    report = graph.consume_stream(EventLog.read_events(log_path))
    return graph, report
