"""Corpus building: page selection, HTML chunking, token cleaning, site documents.

Raw pages (from a JSONL corpus on disk or fetched over HTTP) are decomposed
into per-block token chunks, filtered against a frequency/embedding
vocabulary, and grouped into labeled per-company site documents.
"""

from __future__ import annotations

import json
import re
import threading
import time
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import lru_cache
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urlsplit

DEFAULT_URL_KEYWORDS = (
    "about",
    "about_us",
    "products",
    "product",
    "technology",
    "solutions",
    "services",
    "company",
)

DEFAULT_L_MAX = 128
DEFAULT_MIN_TOKEN_FREQ = 10
DEFAULT_MIN_PAGE_TOKENS = 20
DEFAULT_MIN_EMPLOYEES = 25

FACETS = ("industry", "role")
LABEL_SOURCES = ("internal", "wikipedia", "pseudo")

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Tags whose text forms its own chunk; nested blocks claim their own text.
_BLOCK_TAGS = frozenset(
    {"p", "div", "li", "h1", "h2", "h3", "h4", "h5", "h6", "td", "section", "article"}
)
# Tags whose content never reaches the text stream.
_SKIP_TAGS = frozenset({"script", "style", "noscript", "template"})
# Inline formatting that does not break a word; every other tag boundary does.
_INLINE_TAGS = frozenset(
    {"a", "b", "i", "u", "em", "strong", "span", "small", "sup", "sub", "abbr", "mark"}
)


class CorpusFormatError(ValueError):
    """A JSONL corpus record failed validation; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class VocabularyError(ValueError):
    pass


@dataclass
class RawPage:
    url: str
    domain: str
    html: str
    fetched_at: int

    def __post_init__(self):
        if not self.html:
            raise ValueError(f"empty html for {self.url}")


@dataclass
class TextChunk:
    tokens: list[str]
    source_block: str
    index_in_page: int


@dataclass
class ChunkExtraction:
    """Chunker output; ``fallback`` marks best-effort tag stripping."""

    chunks: list[TextChunk]
    fallback: bool = False


@dataclass
class CleanPage:
    url: str
    chunks: list[TextChunk]
    clean_token_count: int = 0

    def __post_init__(self):
        if self.clean_token_count == 0:
            self.clean_token_count = sum(len(c.tokens) for c in self.chunks)


class FacetLabels(Mapping):
    """facet -> set of label ids, recording which facets were read.

    The access log backs the per-facet isolation check: training on one
    facet must never touch the other facet's labels.
    """

    def __init__(self, labels: dict[str, set[str]] | None = None):
        self._labels: dict[str, set[str]] = {f: set(v) for f, v in (labels or {}).items()}
        self.accessed: set[str] = set()

    def __getitem__(self, facet: str) -> set[str]:
        self.accessed.add(facet)
        return self._labels.get(facet, set())

    def get(self, facet: str, default=None):
        self.accessed.add(facet)
        return self._labels.get(facet, default if default is not None else set())

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def set(self, facet: str, labels: set[str]) -> None:
        self._labels[facet] = set(labels)

    def raw(self) -> dict[str, set[str]]:
        """Unrecorded view, for serialization only."""
        return {f: set(v) for f, v in self._labels.items()}

    def reset_access_log(self) -> None:
        self.accessed.clear()

    def __repr__(self) -> str:
        return f"FacetLabels({self._labels!r})"


@dataclass
class SiteDocument:
    domain: str
    pages: list[CleanPage]
    labels: FacetLabels = field(default_factory=FacetLabels)
    label_source: str = "internal"

    def __post_init__(self):
        if isinstance(self.labels, dict):
            self.labels = FacetLabels(self.labels)
        if self.label_source not in LABEL_SOURCES:
            raise ValueError(f"unknown label source {self.label_source!r}")

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "label_source": self.label_source,
            "labels": {f: sorted(v) for f, v in self.labels.raw().items()},
            "pages": [
                {
                    "url": p.url,
                    "clean_token_count": p.clean_token_count,
                    "chunks": [
                        {"tokens": c.tokens, "source_block": c.source_block, "index_in_page": c.index_in_page}
                        for c in p.chunks
                    ],
                }
                for p in self.pages
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SiteDocument":
        pages = [
            CleanPage(
                url=p["url"],
                chunks=[
                    TextChunk(list(c["tokens"]), c["source_block"], c["index_in_page"])
                    for c in p["chunks"]
                ],
                clean_token_count=p.get("clean_token_count", 0),
            )
            for p in d["pages"]
        ]
        return cls(
            domain=d["domain"],
            pages=pages,
            labels=FacetLabels({f: set(v) for f, v in d.get("labels", {}).items()}),
            label_source=d.get("label_source", "internal"),
        )


@dataclass
class Vocabulary:
    ids: dict[str, int]
    freq: dict[str, int]

    def __contains__(self, token: str) -> bool:
        return token in self.ids

    def __len__(self) -> int:
        return len(self.ids)

    def to_dict(self) -> dict:
        return {"tokens": sorted(self.ids, key=self.ids.get), "freq": self.freq}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(ids={t: i for i, t in enumerate(d["tokens"])}, freq=dict(d["freq"]))


@dataclass
class InfoboxRecord:
    entity_name: str
    domain: str
    fields: dict[str, str]

    def __post_init__(self):
        if not self.entity_name:
            raise ValueError("entity_name empty")


@dataclass
class InfoboxFilterResult:
    kept: list[InfoboxRecord]
    skipped_unparseable: int


# --------------------------------------------------------------------------
# Domain normalization
# --------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _public_suffixes() -> frozenset[str]:
    path = Path(__file__).parent / "data" / "public_suffixes.txt"
    out = set()
    for line in path.read_text().splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            out.add(line)
    return frozenset(out)


def registrable_domain(url: str) -> str:
    """Normalize a URL or host to its lowercase registrable domain.

    Strips scheme, "www.", and port; the registrable domain is one label
    above the longest matching entry of the bundled public-suffix snapshot.
    """
    target = url if "://" in url else "//" + url
    host = (urlsplit(target).hostname or "").lower().rstrip(".")
    if host.startswith("www."):
        host = host[4:]
    if not host:
        return ""
    labels = host.split(".")
    suffixes = _public_suffixes()
    for i in range(1, len(labels)):
        if ".".join(labels[i:]) in suffixes:
            return ".".join(labels[i - 1:])
    return ".".join(labels[-2:]) if len(labels) >= 2 else host


# --------------------------------------------------------------------------
# URL selection
# --------------------------------------------------------------------------


def select_urls(urls: list[str], keywords: Iterable[str] = DEFAULT_URL_KEYWORDS) -> list[str]:
    """Keep the root URL plus URLs whose path contains any keyword.

    Matching is a case-insensitive substring test on the path; input order
    is preserved and duplicates dropped.
    """
    keywords = [k.lower() for k in keywords]
    seen: set[str] = set()
    out: list[str] = []
    for url in urls:
        path = urlsplit(url).path
        is_root = path in ("", "/")
        lowered = path.lower()
        if (is_root or any(k in lowered for k in keywords)) and url not in seen:
            seen.add(url)
            out.append(url)
    return out


# --------------------------------------------------------------------------
# HTML chunking
# --------------------------------------------------------------------------


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


class _BlockChunker(HTMLParser):
    """Streams text into per-block segments.

    Text nodes belong to their nearest enclosing block element; entering or
    leaving a nested block flushes the pending text of the enclosing one, so
    each piece of text is emitted exactly once, in document order.
    """

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.segments: list[tuple[str, str]] = []
        self._buf: list[str] = []
        self._blocks: list[str] = ["body"]
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            if self._skip_depth == 0:
                self._buf.append(" ")  # skipped content still breaks a word
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self._flush()
            self._blocks.append(tag)
        elif tag not in _INLINE_TAGS:
            self._buf.append(" ")

    def handle_startendtag(self, tag, attrs):
        if tag not in _INLINE_TAGS and tag not in _SKIP_TAGS:
            self._buf.append(" ")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in _BLOCK_TAGS:
            self._flush()
            for i in range(len(self._blocks) - 1, 0, -1):
                if self._blocks[i] == tag:
                    del self._blocks[i:]
                    break
        elif tag not in _INLINE_TAGS:
            self._buf.append(" ")

    def handle_data(self, data):
        if self._skip_depth == 0 and data:
            self._buf.append(data)

    def close(self):
        super().close()
        self._flush()

    def _flush(self):
        text = "".join(self._buf)
        self._buf = []
        if text.strip():
            self.segments.append((self._blocks[-1], text))


def _strip_tags(html: str) -> str:
    html = re.sub(r"(?is)<(script|style|noscript|template)\b.*?</\1>", " ", html)
    html = re.sub(r"(?s)<!--.*?-->", " ", html)
    return re.sub(r"<[^>]*>", " ", html)


def _split_tokens(tokens: list[str], l_max: int) -> list[list[str]]:
    return [tokens[i : i + l_max] for i in range(0, len(tokens), l_max)]


def extract_chunks(html: str, l_max: int = DEFAULT_L_MAX) -> ChunkExtraction:
    """Decompose HTML into token chunks, one per block-level element.

    Blocks longer than ``l_max`` are hard-split into consecutive chunks.
    If parsing fails, falls back to stripping all tags and chunking the
    remaining text, with ``fallback=True`` on the result.
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    fallback = False
    try:
        parser = _BlockChunker()
        parser.feed(html)
        parser.close()
        segments = parser.segments
    except Exception:
        fallback = True
        segments = [("fallback", _strip_tags(html))]

    chunks: list[TextChunk] = []
    index = 0
    for block, text in segments:
        tokens = tokenize(text)
        if not tokens:
            continue
        for part in _split_tokens(tokens, l_max):
            chunks.append(TextChunk(tokens=part, source_block=block, index_in_page=index))
            index += 1
    return ChunkExtraction(chunks=chunks, fallback=fallback)


# --------------------------------------------------------------------------
# Vocabulary and cleaning
# --------------------------------------------------------------------------


def count_tokens(sites: Iterable[SiteDocument]) -> Counter:
    counts: Counter = Counter()
    for site in sites:
        for page in site.pages:
            for chunk in page.chunks:
                counts.update(chunk.tokens)
    return counts


def build_vocabulary(
    sites: list[SiteDocument],
    embedding_vocab: set[str],
    min_freq: int = DEFAULT_MIN_TOKEN_FREQ,
) -> Vocabulary:
    """Tokens with corpus frequency >= ``min_freq`` that the embedding covers.

    Ids are assigned by descending frequency, ties broken lexicographically.
    """
    if not sites:
        raise ValueError("no sites")
    counts = count_tokens(sites)
    admitted = {t: c for t, c in counts.items() if c >= min_freq and t in embedding_vocab}
    if not admitted:
        raise VocabularyError("vocabulary empty")
    ordered = sorted(admitted, key=lambda t: (-admitted[t], t))
    return Vocabulary(ids={t: i for i, t in enumerate(ordered)}, freq=admitted)


def clean_pages(
    pages: list[CleanPage],
    vocab: Vocabulary,
    min_tokens: int = DEFAULT_MIN_PAGE_TOKENS,
) -> list[CleanPage]:
    """Drop out-of-vocabulary tokens, empty chunks, and thin pages.

    Idempotent: cleaning an already-clean page list is a no-op.
    """
    out: list[CleanPage] = []
    for page in pages:
        chunks = []
        for chunk in page.chunks:
            kept = [t for t in chunk.tokens if t in vocab]
            if kept:
                chunks.append(TextChunk(kept, chunk.source_block, chunk.index_in_page))
        total = sum(len(c.tokens) for c in chunks)
        if total >= min_tokens:
            out.append(CleanPage(url=page.url, chunks=chunks, clean_token_count=total))
    return out


# --------------------------------------------------------------------------
# Wikipedia info-box relevance filter
# --------------------------------------------------------------------------


def _parse_employee_count(raw: str) -> int | None:
    s = raw.strip().rstrip("+").replace(",", "").strip()
    return int(s) if s.isdigit() else None


def filter_relevant_infobox(
    records: list[InfoboxRecord], min_employees: int = DEFAULT_MIN_EMPLOYEES
) -> InfoboxFilterResult:
    """Keep records with an industry, enough employees, and a domain."""
    if min_employees < 0:
        raise ValueError("min_employees must be >= 0")
    kept: list[InfoboxRecord] = []
    skipped = 0
    for rec in records:
        if not rec.fields.get("industry", "").strip() or not rec.domain:
            continue
        raw = rec.fields.get("num_employees", "")
        parsed = _parse_employee_count(raw)
        if parsed is None:
            skipped += 1
            continue
        if parsed >= min_employees:
            kept.append(rec)
    return InfoboxFilterResult(kept=kept, skipped_unparseable=skipped)


# --------------------------------------------------------------------------
# JSONL readers / writers
# --------------------------------------------------------------------------


def read_corpus_jsonl(path: str | Path) -> list[RawPage]:
    pages = []
    for lineno, record in _iter_jsonl(path):
        pages.append(parse_corpus_record(record, lineno))
    return pages


def parse_corpus_record(record: dict, lineno: int = 0) -> RawPage:
    for key in ("domain", "url", "html", "fetched_at"):
        if key not in record:
            raise CorpusFormatError(f"missing field {key!r}", lineno)
    try:
        return RawPage(
            url=str(record["url"]),
            domain=str(record["domain"]).lower(),
            html=str(record["html"]),
            fetched_at=int(record["fetched_at"]),
        )
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(str(exc), lineno) from exc


def read_labels_jsonl(path: str | Path) -> list[dict]:
    out = []
    for lineno, record in _iter_jsonl(path):
        facet = record.get("facet")
        if facet not in FACETS:
            raise CorpusFormatError(f"unknown facet {facet!r}", lineno)
        source = record.get("source", "internal")
        if source not in ("internal", "wikipedia"):
            raise CorpusFormatError(f"unknown label source {source!r}", lineno)
        out.append(
            {
                "domain": str(record["domain"]).lower(),
                "facet": facet,
                "labels": [str(x) for x in record.get("labels", [])],
                "source": source,
            }
        )
    return out


def read_infobox_jsonl(path: str | Path) -> list[InfoboxRecord]:
    out = []
    for lineno, record in _iter_jsonl(path):
        if "entity" not in record:
            raise CorpusFormatError("missing field 'entity'", lineno)
        out.append(
            InfoboxRecord(
                entity_name=str(record["entity"]),
                domain=str(record.get("domain", "")).lower(),
                fields={str(k): str(v) for k, v in record.get("fields", {}).items()},
            )
        )
    return out


def _iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", lineno) from exc
            if not isinstance(record, dict):
                raise CorpusFormatError("record is not an object", lineno)
            yield lineno, record


# --------------------------------------------------------------------------
# Site store
# --------------------------------------------------------------------------

_SITES_FORMAT = "facetseg-sites"


def save_sites(path: str | Path, sites: list[SiteDocument], vocab: Vocabulary | None = None) -> None:
    payload = {
        "format": _SITES_FORMAT,
        "version": 1,
        "vocab": vocab.to_dict() if vocab else None,
        "sites": [s.to_dict() for s in sites],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8")


def load_sites(path: str | Path) -> tuple[list[SiteDocument], Vocabulary | None]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != _SITES_FORMAT:
        raise ValueError(f"{path}: not a site store")
    vocab = Vocabulary.from_dict(payload["vocab"]) if payload.get("vocab") else None
    return [SiteDocument.from_dict(d) for d in payload["sites"]], vocab


# --------------------------------------------------------------------------
# Build pipeline
# --------------------------------------------------------------------------


@dataclass
class CorpusConfig:
    url_keywords: tuple[str, ...] = DEFAULT_URL_KEYWORDS
    l_max: int = DEFAULT_L_MAX
    min_token_freq: int = DEFAULT_MIN_TOKEN_FREQ
    min_page_tokens: int = DEFAULT_MIN_PAGE_TOKENS
    min_employees: int = DEFAULT_MIN_EMPLOYEES


@dataclass
class BuildReport:
    domains_in: int = 0
    pages_in: int = 0
    pages_selected: int = 0
    pages_kept: int = 0
    sites_kept: int = 0
    parser_fallbacks: int = 0


def build_sites(
    pages: list[RawPage],
    label_records: list[dict],
    embedding_vocab: set[str],
    config: CorpusConfig | None = None,
) -> tuple[list[SiteDocument], Vocabulary, BuildReport]:
    """Full corpus build: select, chunk, vocabulary-filter, label, assemble."""
    cfg = config or CorpusConfig()
    report = BuildReport(pages_in=len(pages))

    by_domain: dict[str, list[RawPage]] = {}
    for page in pages:
        domain = registrable_domain(page.url) or page.domain
        by_domain.setdefault(domain, []).append(page)
    report.domains_in = len(by_domain)

    provisional: list[SiteDocument] = []
    for domain in sorted(by_domain):
        domain_pages = by_domain[domain]
        selected = set(select_urls([p.url for p in domain_pages], cfg.url_keywords))
        report.pages_selected += len(selected)
        clean: list[CleanPage] = []
        for page in domain_pages:
            if page.url not in selected:
                continue
            extraction = extract_chunks(page.html, cfg.l_max)
            if extraction.fallback:
                report.parser_fallbacks += 1
            if extraction.chunks:
                clean.append(CleanPage(url=page.url, chunks=extraction.chunks))
        if clean:
            provisional.append(SiteDocument(domain=domain, pages=clean))

    if not provisional:
        raise VocabularyError("vocabulary empty")
    vocab = build_vocabulary(provisional, embedding_vocab, cfg.min_token_freq)

    labels_by_domain: dict[str, dict[str, set[str]]] = {}
    source_by_domain: dict[str, str] = {}
    for rec in label_records:
        labels_by_domain.setdefault(rec["domain"], {}).setdefault(rec["facet"], set()).update(rec["labels"])
        source_by_domain[rec["domain"]] = rec["source"]

    sites: list[SiteDocument] = []
    for site in provisional:
        kept_pages = clean_pages(site.pages, vocab, cfg.min_page_tokens)
        report.pages_kept += len(kept_pages)
        if not kept_pages:
            continue
        sites.append(
            SiteDocument(
                domain=site.domain,
                pages=kept_pages,
                labels=FacetLabels(labels_by_domain.get(site.domain, {})),
                label_source=source_by_domain.get(site.domain, "internal"),
            )
        )
    report.sites_kept = len(sites)
    return sites, vocab, report


# --------------------------------------------------------------------------
# HTTP fetching
# --------------------------------------------------------------------------


class RateLimiter:
    """Minimum-interval limiter, safe to share across fetch threads."""

    def __init__(self, rate_per_sec: float):
        if rate_per_sec <= 0:
            raise ValueError("rate must be positive")
        self._interval = 1.0 / rate_per_sec
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if delay > 0:
            time.sleep(delay)


def fetch_pages(urls: list[str], rate_per_sec: float = 2.0, client=None) -> list[RawPage]:
    """Fetch URLs into RawPages; failures are skipped. Injectable client for tests."""
    import httpx

    limiter = RateLimiter(rate_per_sec)
    own_client = client is None
    if own_client:
        client = httpx.Client(follow_redirects=True, timeout=10.0)
    pages = []
    try:
        for url in urls:
            limiter.wait()
            try:
                resp = client.get(url)
                resp.raise_for_status()
            except httpx.HTTPError:
                continue
            if resp.text:
                pages.append(
                    RawPage(
                        url=url,
                        domain=registrable_domain(url),
                        html=resp.text,
                        fetched_at=int(time.time()),
                    )
                )
    finally:
        if own_client:
            client.close()
    return pages
