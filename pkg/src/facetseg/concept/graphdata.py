"""Inlink graph over concepts and companies, plus industry-product counts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class LinkGraph:
    entities: set[str]
    inlinks: dict[str, set[str]]
    cooc: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        for entity, links in self.inlinks.items():
            self.entities.add(entity)
            missing = links - self.entities
            if missing:
                raise ValueError(f"inlinks of {entity!r} reference unknown entities {sorted(missing)[:3]}")
        if not self.entities:
            raise ValueError("empty graph")

    @property
    def W(self) -> int:
        return len(self.entities)

    def inlink_set(self, entity: str) -> set[str]:
        if entity not in self.entities:
            raise KeyError(f"unknown entity {entity!r}")
        return self.inlinks.get(entity, set())

    def industries(self) -> list[str]:
        return sorted({i for i, _ in self.cooc})

    def products(self) -> list[str]:
        return sorted({p for _, p in self.cooc})

    def sorted_entities(self) -> list[str]:
        return sorted(self.entities)


def load_link_graph(path: str | Path) -> LinkGraph:
    """Read entity/inlink records and cooc records from one JSONL file."""
    entities: set[str] = set()
    inlinks: dict[str, set[str]] = {}
    cooc: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc.msg}") from exc
            if "cooc" in record:
                c = record["cooc"]
                key = (str(c["industry"]), str(c["product"]))
                cooc[key] = cooc.get(key, 0) + int(c["count"])
                entities.add(key[0])
                entities.add(key[1])
            elif "entity" in record:
                entity = str(record["entity"])
                entities.add(entity)
                links = {str(x) for x in record.get("inlinks", [])}
                entities.update(links)
                inlinks[entity] = inlinks.get(entity, set()) | links
            else:
                raise ValueError(f"{path}: line {lineno}: expected 'entity' or 'cooc' record")
    return LinkGraph(entities=entities, inlinks=inlinks, cooc=cooc)


def save_link_graph(graph: LinkGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entity in graph.sorted_entities():
            fh.write(
                json.dumps({"entity": entity, "inlinks": sorted(graph.inlinks.get(entity, set()))})
                + "\n"
            )
        for (industry, product), count in sorted(graph.cooc.items()):
            fh.write(
                json.dumps({"cooc": {"industry": industry, "product": product, "count": count}})
                + "\n"
            )
