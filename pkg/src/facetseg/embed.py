"""Pre-trained word vectors: text-file loading and chunk encoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import TextChunk


class EmbeddingFormatError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    """Immutable token -> vector table with a consistent dimension."""

    dimension: int
    vectors: np.ndarray            # (n_tokens, dimension), float64
    index: dict[str, int]
    duplicate_warnings: int = 0
    tokens: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.tokens:
            self.tokens = sorted(self.index, key=self.index.get)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __len__(self) -> int:
        return len(self.index)

    def lookup(self, token: str) -> np.ndarray | None:
        i = self.index.get(token)
        return None if i is None else self.vectors[i]

    def vocab(self) -> set[str]:
        return set(self.index)


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse a word-vector text file: one token plus d decimals per line.

    Duplicate tokens keep the first occurrence and bump a warning counter;
    a line whose vector length disagrees with the first line is an error.
    """
    tokens: list[str] = []
    rows: list[list[float]] = []
    index: dict[str, int] = {}
    duplicates = 0
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dimension is None:
                dimension = len(values)
                if dimension == 0:
                    raise EmbeddingFormatError(f"no vector values on line {lineno}")
            elif len(values) != dimension:
                raise EmbeddingFormatError(f"dimension mismatch line {lineno}")
            if token in index:
                duplicates += 1
                continue
            try:
                row = [float(v) for v in values]
            except ValueError as exc:
                raise EmbeddingFormatError(f"bad number on line {lineno}: {exc}") from exc
            index[token] = len(tokens)
            tokens.append(token)
            rows.append(row)
    if dimension is None:
        raise EmbeddingFormatError("empty embedding file")
    return EmbeddingTable(
        dimension=dimension,
        vectors=np.asarray(rows, dtype=np.float64),
        index=index,
        duplicate_warnings=duplicates,
        tokens=tokens,
    )


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token in table.tokens:
            vec = table.vectors[table.index[token]]
            fh.write(token + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def encode_chunk(chunk: TextChunk, table: EmbeddingTable, mode: str = "mean") -> np.ndarray:
    """Encode a chunk as a (n_tokens, d) matrix or its token-mean vector.

    All chunk tokens must be present in the table (guaranteed after
    vocabulary filtering).
    """
    if not chunk.tokens:
        raise ValueError("empty chunk")
    if mode not in ("sequence", "mean"):
        raise ValueError(f"unknown mode {mode!r}")
    try:
        idx = [table.index[t] for t in chunk.tokens]
    except KeyError as exc:
        raise KeyError(f"token {exc.args[0]!r} not in embedding table") from exc
    matrix = table.vectors[idx]
    return matrix if mode == "sequence" else matrix.mean(axis=0)


def encode_page(chunks: list[TextChunk], table: EmbeddingTable) -> np.ndarray:
    """Stack per-chunk mean vectors into the page's (n_chunks, d) input."""
    if not chunks:
        raise ValueError("no chunks")
    return np.stack([encode_chunk(c, table, "mean") for c in chunks])
