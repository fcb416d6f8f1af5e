"""Service configuration and the stateful core behind the endpoints."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import (
    DEFAULT_L_MAX,
    CorpusFormatError,
    TextChunk,
    extract_chunks,
    parse_corpus_record,
    registrable_domain,
)
from ..embed import EmbeddingTable, load_embeddings
from ..kg import Edge, EntityNode, IngestionReport, KnowledgeGraph, UpsertEvent
from ..model import forward_page, forward_site, load_model
from ..concept import ConceptEmbedding, LabelCluster, cosine_graph, load_embedding_file


class ConfigError(ValueError):
    pass


class DomainNotIngestedError(KeyError):
    pass


class ModelNotLoadedError(RuntimeError):
    pass


class EmbeddingNotBuiltError(RuntimeError):
    pass


class UnknownFacetError(ValueError):
    pass


class UnknownLabelError(ValueError):
    pass


class EmptyQueryError(ValueError):
    pass


class NoUsablePagesError(ValueError):
    pass


class ClusterNotFoundError(KeyError):
    pass


class ClusterAlreadyDecidedError(RuntimeError):
    pass


class BadDecisionError(ValueError):
    pass


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8099
    kg_wal: str | None = None
    embeddings: str | None = None
    models: dict[str, str] = field(default_factory=dict)   # facet -> model file
    concept_embedding: str | None = None
    clusters: str | None = None
    decision_log: str | None = None
    ui_dir: str | None = None
    l_max: int = DEFAULT_L_MAX
    auth_token: str | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc.msg}") from exc
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config = cls(**raw)
        for facet in config.models:
            if facet not in ("industry", "role"):
                raise ConfigError(f"unknown facet in models: {facet!r}")
        return config


def _chunks_to_json(chunks: list[TextChunk]) -> str:
    return json.dumps([c.tokens for c in chunks], separators=(",", ":"))


def _chunks_from_json(raw: str) -> list[TextChunk]:
    return [TextChunk(list(tokens), "stored", i) for i, tokens in enumerate(json.loads(raw))]


class AppState:
    """Everything the endpoints read or mutate, loaded from one config."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.graph = KnowledgeGraph(wal_path=config.kg_wal)
        self.embeddings: EmbeddingTable | None = (
            load_embeddings(config.embeddings) if config.embeddings else None
        )
        self.models = {}
        for facet, path in config.models.items():
            params = load_model(path)
            if params.facet is None or params.facet.facet != facet:
                raise ConfigError(f"model at {path} is not a {facet!r} model")
            self.models[facet] = params
        self.concept_embedding: ConceptEmbedding | None = (
            load_embedding_file(config.concept_embedding) if config.concept_embedding else None
        )
        self.clusters: dict[str, LabelCluster] = {}
        if config.clusters:
            payload = json.loads(Path(config.clusters).read_text(encoding="utf-8"))
            for d in payload["clusters"]:
                cluster = LabelCluster.from_dict(d)
                self.clusters[cluster.cluster_id] = cluster
        self.predictions: dict[tuple[str, str], dict[str, float]] = {}
        self._decide_lock = threading.Lock()
        if config.decision_log:
            self._replay_decisions(Path(config.decision_log))

    # -- ingestion ----------------------------------------------------------

    def ingest_text(self, body: str) -> IngestionReport:
        """Corpus JSONL body -> chunked pages -> per-domain upsert events."""
        pages = []
        for lineno, line in enumerate(body.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", lineno) from exc
            if not isinstance(record, dict):
                raise CorpusFormatError("record is not an object", lineno)
            pages.append(parse_corpus_record(record, lineno))
        return self.ingest_pages(pages)

    def ingest_pages(self, pages) -> IngestionReport:
        by_domain: dict[str, list] = {}
        for page in pages:
            domain = registrable_domain(page.url) or page.domain
            by_domain.setdefault(domain, []).append(page)
        events = []
        for domain in sorted(by_domain):
            domain_pages = by_domain[domain]
            children = []
            edges = []
            for page in sorted(domain_pages, key=lambda p: p.url):
                extraction = extract_chunks(page.html, self.config.l_max)
                children.append(
                    EntityNode(
                        id=page.url,
                        kind="page",
                        attributes={
                            "url": page.url,
                            "fetched_at": page.fetched_at,
                            "chunks": _chunks_to_json(extraction.chunks),
                            "parser_fallback": extraction.fallback,
                        },
                    )
                )
                edges.append(Edge(src=domain, dst=page.url, kind="has_page"))
            events.append(
                UpsertEvent(
                    key=domain,
                    sequence=max(p.fetched_at for p in domain_pages),
                    node=EntityNode(
                        id=domain,
                        kind="company",
                        attributes={"domain": domain, "page_count": len(domain_pages)},
                    ),
                    children=children,
                    edges=edges,
                )
            )
        return self.graph.consume_stream(events)

    # -- classification and leads -------------------------------------------

    def classify(self, domain: str, facet: str):
        if facet not in ("industry", "role"):
            raise UnknownFacetError(f"unknown facet {facet!r}")
        params = self.models.get(facet)
        if params is None:
            raise ModelNotLoadedError(f"no model loaded for facet {facet!r}")
        if self.embeddings is None:
            raise ModelNotLoadedError("no embedding table loaded")
        if not self.graph.has_node(domain):
            raise DomainNotIngestedError(domain)

        page_preds = []
        for page_node, _ in self.graph.neighbors(domain, "has_page"):
            chunks = _chunks_from_json(page_node.attributes.get("chunks", "[]"))
            kept = []
            for chunk in chunks:
                tokens = [
                    t
                    for t in chunk.tokens
                    if (params.vocab is None or t in params.vocab) and t in self.embeddings
                ]
                if tokens:
                    kept.append(TextChunk(tokens, chunk.source_block, chunk.index_in_page))
            if not kept:
                continue
            from ..embed import encode_page

            page_preds.append(
                forward_page(encode_page(kept, self.embeddings), params, url=page_node.id)
            )
        if not page_preds:
            raise NoUsablePagesError(f"no usable pages for {domain}")
        site = forward_site(page_preds, domain=domain)
        probs = site.probs_by_label(params.facet)
        self.predictions[(domain, facet)] = probs
        return site, probs

    def leads(self, industries: list[str], roles: list[str], min_prob: float, limit: int):
        if not industries and not roles:
            raise EmptyQueryError("empty query")
        for facet, labels in (("industry", industries), ("role", roles)):
            spec = self.models.get(facet).facet if facet in self.models else None
            for label in labels:
                if spec is None or label not in spec.labels:
                    raise UnknownLabelError(f"unknown label {label!r} for facet {facet}")

        requested = [("industry", l) for l in industries] + [("role", l) for l in roles]
        domains = {d for (d, _f) in self.predictions}
        hits = []
        for domain in domains:
            probs: dict[str, float] = {}
            ok = True
            for facet, label in requested:
                cached = self.predictions.get((domain, facet))
                if cached is None or cached.get(label, 0.0) < min_prob:
                    ok = False
                    break
                probs[label] = cached[label]
            if ok:
                score = 1.0
                for p in probs.values():
                    score *= p
                hits.append((domain, score, probs))
        hits.sort(key=lambda h: (-h[1], h[0]))
        return hits[:limit]

    def company_detail(self, domain: str) -> dict:
        node = self.graph.node(domain)
        pages = [p.id for p, _ in self.graph.neighbors(domain, "has_page")]
        preds = {
            facet: self.predictions[(domain, facet)]
            for facet in ("industry", "role")
            if (domain, facet) in self.predictions
        }
        labels = {}
        for facet in ("industry", "role"):
            raw = node.attributes.get(f"labels_{facet}")
            if raw:
                labels[facet] = sorted(json.loads(raw))
        return {"domain": domain, "pages": pages, "labels": labels, "predictions": preds}

    # -- concepts -------------------------------------------------------------

    def concept_graph(self, theta: float):
        if self.concept_embedding is None:
            raise EmbeddingNotBuiltError("concept embedding not built")
        edges = cosine_graph(self.concept_embedding, theta)
        return self.concept_embedding.ids, edges

    def concept_neighbors(self, concept_id: str, theta: float, limit: int):
        if self.concept_embedding is None:
            raise EmbeddingNotBuiltError("concept embedding not built")
        if concept_id not in self.concept_embedding.ids:
            raise KeyError(concept_id)
        out = []
        for edge in cosine_graph(self.concept_embedding, theta):
            if edge.src == concept_id:
                out.append((edge.dst, edge.weight))
            elif edge.dst == concept_id:
                out.append((edge.src, edge.weight))
        out.sort(key=lambda x: (-x[1], x[0]))
        return out[:limit]

    # -- cluster validation ----------------------------------------------------

    def decide_cluster(self, cluster_id: str, status: str, merge_into: str | None, actor: str) -> LabelCluster:
        with self._decide_lock:
            cluster = self.clusters.get(cluster_id)
            if cluster is None:
                raise ClusterNotFoundError(cluster_id)
            if cluster.status != "proposed":
                raise ClusterAlreadyDecidedError(f"cluster {cluster_id} already {cluster.status}")
            if status == "merged":
                if not merge_into:
                    raise BadDecisionError("merged decision requires merge_into")
                if merge_into == cluster_id or merge_into not in self.clusters:
                    raise BadDecisionError(f"invalid merge target {merge_into!r}")
            elif merge_into:
                raise BadDecisionError("merge_into only valid with status=merged")
            self._apply_decision(cluster, status, merge_into)
            if self.config.decision_log:
                entry = {
                    "ts": int(time.time()),
                    "actor": actor,
                    "cluster_id": cluster_id,
                    "status": status,
                    "merge_into": merge_into,
                }
                with open(self.config.decision_log, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, sort_keys=True) + "\n")
            return cluster

    @staticmethod
    def _apply_decision(cluster: LabelCluster, status: str, merge_into: str | None) -> None:
        cluster.status = status
        cluster.merged_into = merge_into if status == "merged" else None

    def _replay_decisions(self, path: Path) -> None:
        if not path.exists():
            return
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            entry = json.loads(line)
            cluster = self.clusters.get(entry["cluster_id"])
            if cluster is None:
                raise ConfigError(f"decision log line {lineno}: unknown cluster {entry['cluster_id']!r}")
            self._apply_decision(cluster, entry["status"], entry.get("merge_into"))
