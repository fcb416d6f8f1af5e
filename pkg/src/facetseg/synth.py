"""Synthetic labeled corpora: the desk-scale stand-in for proprietary data.

Each label owns a keyword pool; a site labeled with it draws a configurable
share of its tokens from that pool, the rest from a shared filler pool.
Generated corpora are separable enough for classifiers to learn, which lets
the experiment harnesses reproduce protocol shapes and directional effects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CleanPage, FacetLabels, SiteDocument, TextChunk
from .embed import EmbeddingTable

DEFAULT_INDUSTRIES = ("agritech", "fintech", "gaming", "healthcare", "logistics", "mediatech")
DEFAULT_ROLES = ("distributor", "manufacturer", "retailer", "serviceprovider")


@dataclass
class SynthConfig:
    n_sites: int = 200
    industries: tuple[str, ...] = DEFAULT_INDUSTRIES
    roles: tuple[str, ...] = DEFAULT_ROLES
    pool_size: int = 15
    filler_size: int = 60
    signal: float = 0.6               # share of tokens drawn from label pools
    second_industry_prob: float = 0.2
    pages_per_site: tuple[int, int] = (1, 3)
    chunks_per_page: tuple[int, int] = (4, 8)
    tokens_per_chunk: tuple[int, int] = (8, 15)
    dim: int = 16
    center_scale: float = 4.0
    seed: int = 13
    domain_prefix: str = "s"
    label_source: str = "internal"

    def pools(self) -> dict[str, list[str]]:
        out = {}
        for label in self.industries + self.roles:
            out[label] = [f"{label}w{j}" for j in range(self.pool_size)]
        return out

    def filler(self) -> list[str]:
        return [f"fillerw{j}" for j in range(self.filler_size)]

    def all_tokens(self) -> list[str]:
        tokens = []
        for pool in self.pools().values():
            tokens.extend(pool)
        tokens.extend(self.filler())
        return tokens


def make_embedding_table(config: SynthConfig) -> EmbeddingTable:
    """Seed-stable vectors: each label pool clusters around its own center.

    Pool tokens sit near a per-label direction, filler tokens around the
    origin, so label content is linearly separable in embedding space.
    """
    rng = np.random.default_rng(config.seed + 1)
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    for label, pool in config.pools().items():
        center = rng.normal(0.0, 1.0, config.dim)
        center *= config.center_scale / np.linalg.norm(center)
        for token in pool:
            tokens.append(token)
            rows.append(center + rng.uniform(-0.5, 0.5, config.dim))
    for token in config.filler():
        tokens.append(token)
        rows.append(rng.uniform(-0.5, 0.5, config.dim))
    return EmbeddingTable(
        dimension=config.dim,
        vectors=np.asarray(rows),
        index={t: i for i, t in enumerate(tokens)},
        tokens=tokens,
    )


def _draw_site(
    rng: np.random.Generator,
    config: SynthConfig,
    domain: str,
    declared: dict[str, set[str]],
    content_labels: list[str],
    label_source: str,
) -> SiteDocument:
    pools = config.pools()
    filler = config.filler()
    pages = []
    n_pages = int(rng.integers(config.pages_per_site[0], config.pages_per_site[1] + 1))
    for pi in range(n_pages):
        chunks = []
        n_chunks = int(rng.integers(config.chunks_per_page[0], config.chunks_per_page[1] + 1))
        for ci in range(n_chunks):
            n_tok = int(rng.integers(config.tokens_per_chunk[0], config.tokens_per_chunk[1] + 1))
            tokens = []
            for _ in range(n_tok):
                if content_labels and rng.random() < config.signal:
                    pool = pools[content_labels[int(rng.integers(len(content_labels)))]]
                    tokens.append(pool[int(rng.integers(len(pool)))])
                else:
                    tokens.append(filler[int(rng.integers(len(filler)))])
            chunks.append(TextChunk(tokens=tokens, source_block="p", index_in_page=ci))
        url = f"https://{domain}/about" if pi == 0 else f"https://{domain}/products/{pi}"
        pages.append(CleanPage(url=url, chunks=chunks))
    return SiteDocument(
        domain=domain,
        pages=pages,
        labels=FacetLabels(declared),
        label_source=label_source,
    )


def make_sites(config: SynthConfig, seed: int | None = None) -> list[SiteDocument]:
    """Sites whose page content reflects their declared labels."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    sites = []
    for i in range(config.n_sites):
        domain = f"{config.domain_prefix}{i:04d}.com"
        industries = {config.industries[int(rng.integers(len(config.industries)))]}
        if rng.random() < config.second_industry_prob:
            industries.add(config.industries[int(rng.integers(len(config.industries)))])
        role = {config.roles[int(rng.integers(len(config.roles)))]}
        declared = {"industry": industries, "role": role}
        content = sorted(industries | role)
        sites.append(_draw_site(rng, config, domain, declared, content, config.label_source))
    return sites


def make_mislabeled_sites(
    config: SynthConfig,
    facet: str,
    class_id: str,
    n_sites: int,
    seed: int,
    domain_prefix: str = "x",
    label_source: str = "wikipedia",
) -> list[SiteDocument]:
    """Sites declared as ``class_id`` whose content comes from other classes.

    The noisy-label arm of the label-source swap: the declared label for the
    chosen facet is fixed while content tokens are drawn from a randomly
    chosen different class of the same facet.
    """
    space = config.industries if facet == "industry" else config.roles
    others = [c for c in space if c != class_id]
    rng = np.random.default_rng(seed)
    sites = []
    for i in range(n_sites):
        domain = f"{domain_prefix}{i:04d}.com"
        wrong = others[int(rng.integers(len(others)))]
        other_facet = "role" if facet == "industry" else "industry"
        other_space = config.roles if facet == "industry" else config.industries
        other_label = other_space[int(rng.integers(len(other_space)))]
        declared = {facet: {class_id}, other_facet: {other_label}}
        content = sorted({wrong, other_label})
        sites.append(_draw_site(rng, config, domain, declared, content, label_source))
    return sites


def site_html(site: SiteDocument) -> list[tuple[str, str]]:
    """Render each page's chunks as <p> blocks; inverse of the chunker."""
    out = []
    for page in site.pages:
        body = "".join(f"<p>{' '.join(c.tokens)}</p>" for c in page.chunks)
        out.append((page.url, f"<html><body>{body}</body></html>"))
    return out


def write_corpus_files(
    sites: list[SiteDocument],
    table: EmbeddingTable,
    out_dir: str | Path,
    base_fetched_at: int = 1_700_000_000,
) -> dict[str, Path]:
    """Write pages.jsonl / labels.jsonl / vectors.txt for CLI-level runs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pages_path = out_dir / "pages.jsonl"
    labels_path = out_dir / "labels.jsonl"
    vectors_path = out_dir / "vectors.txt"

    with open(pages_path, "w", encoding="utf-8") as fh:
        for i, site in enumerate(sites):
            for url, html in site_html(site):
                fh.write(
                    json.dumps(
                        {
                            "domain": site.domain,
                            "url": url,
                            "html": html,
                            "fetched_at": base_fetched_at + i,
                        }
                    )
                    + "\n"
                )
    with open(labels_path, "w", encoding="utf-8") as fh:
        for site in sites:
            source = "wikipedia" if site.label_source == "wikipedia" else "internal"
            for facet, labels in sorted(site.labels.raw().items()):
                if labels:
                    fh.write(
                        json.dumps(
                            {
                                "domain": site.domain,
                                "facet": facet,
                                "labels": sorted(labels),
                                "source": source,
                            }
                        )
                        + "\n"
                    )
    with open(vectors_path, "w", encoding="utf-8") as fh:
        for token in table.tokens:
            vec = table.vectors[table.index[token]]
            fh.write(token + " " + " ".join(repr(float(x)) for x in vec) + "\n")
    return {"pages": pages_path, "labels": labels_path, "vectors": vectors_path}
