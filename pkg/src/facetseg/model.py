"""Per-facet multi-label classifier over chunked pages.

A page is a sequence of chunk vectors; convolution filters slide over the
sequence, ReLU + max-over-time pooling picks out the most informative
windows, and a sigmoid output head yields independent per-label
probabilities. Site predictions are the arithmetic mean of page
predictions. Training is plain mini-batch gradient descent with exact
analytic gradients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .corpus import FACETS, SiteDocument, Vocabulary
from .embed import EmbeddingTable, encode_page

LOSS_EPS = 1e-7


@dataclass
class FacetSpec:
    facet: str
    labels: list[str]

    def __post_init__(self):
        if self.facet not in FACETS:
            raise ValueError(f"unknown facet {self.facet!r}")
        if len(self.labels) < 2:
            raise ValueError("facet needs at least 2 labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")

    @property
    def n_classes(self) -> int:
        return len(self.labels)


def facet_spec_from_sites(sites: list[SiteDocument], facet: str) -> FacetSpec:
    labels: set[str] = set()
    for site in sites:
        labels.update(site.labels.get(facet, set()))
    return FacetSpec(facet=facet, labels=sorted(labels))


@dataclass
class ModelConfig:
    widths: tuple[int, ...] = (2, 3)
    n_filters: int = 8
    # The mean-over-classes loss scales gradients by 1/C, so the step size
    # is larger than a per-logit-sum objective would use.
    learning_rate: float = 1.5
    batch_size: int = 16
    epochs: int = 30
    seed: int = 7
    arch: str = "cnn"  # "cnn" | "linear"


@dataclass
class PagePrediction:
    url: str
    probs: np.ndarray


@dataclass
class SitePrediction:
    domain: str
    probs: np.ndarray
    per_page: list[PagePrediction] = field(default_factory=list)

    def probs_by_label(self, spec: FacetSpec) -> dict[str, float]:
        return {lbl: float(p) for lbl, p in zip(spec.labels, self.probs)}


@dataclass
class ModelParams:
    """CNN head: per-width filter banks plus a sigmoid output layer.

    ``arrays`` keys: ``conv_w:{w}`` (F, w, d_in), ``conv_b:{w}`` (F,),
    ``out_w`` (C, F * n_widths), ``out_b`` (C,).
    """

    facet: FacetSpec | None
    d_in: int
    widths: tuple[int, ...]
    n_filters: int
    arrays: dict[str, np.ndarray]
    loss_history: list[float] = field(default_factory=list)
    vocab: Vocabulary | None = None
    config: ModelConfig | None = None

    arch = "cnn"

    @property
    def n_classes(self) -> int:
        return self.arrays["out_b"].shape[0]


@dataclass
class LinearParams:
    """Baseline: mean chunk vector -> sigmoid linear layer.

    ``arrays`` keys: ``out_w`` (C, d_in), ``out_b`` (C,).
    """

    facet: FacetSpec | None
    d_in: int
    arrays: dict[str, np.ndarray]
    loss_history: list[float] = field(default_factory=list)
    vocab: Vocabulary | None = None
    config: ModelConfig | None = None

    arch = "linear"

    @property
    def n_classes(self) -> int:
        return self.arrays["out_b"].shape[0]


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_params(spec: FacetSpec, d_in: int, config: ModelConfig, rng: np.random.Generator) -> ModelParams | LinearParams:
    if config.arch == "linear":
        arrays = {
            "out_w": rng.normal(0.0, 0.1, size=(spec.n_classes, d_in)),
            "out_b": np.zeros(spec.n_classes),
        }
        return LinearParams(facet=spec, d_in=d_in, arrays=arrays, config=config)
    if config.arch != "cnn":
        raise ValueError(f"unknown arch {config.arch!r}")
    arrays: dict[str, np.ndarray] = {}
    for w in config.widths:
        arrays[f"conv_w:{w}"] = rng.normal(0.0, 0.1, size=(config.n_filters, w, d_in))
        arrays[f"conv_b:{w}"] = np.zeros(config.n_filters)
    n_feat = config.n_filters * len(config.widths)
    arrays["out_w"] = rng.normal(0.0, 0.1, size=(spec.n_classes, n_feat))
    arrays["out_b"] = np.zeros(spec.n_classes)
    return ModelParams(
        facet=spec,
        d_in=d_in,
        widths=tuple(config.widths),
        n_filters=config.n_filters,
        arrays=arrays,
        config=config,
    )


# --------------------------------------------------------------------------
# Forward
# --------------------------------------------------------------------------


def _pad_chunks(V: np.ndarray, min_len: int) -> np.ndarray:
    if V.ndim != 2:
        raise ValueError(f"chunk vectors must be 2-d, got shape {V.shape}")
    if V.shape[0] >= min_len:
        return V
    pad = np.zeros((min_len - V.shape[0], V.shape[1]))
    return np.vstack([V, pad])


def _conv_features(V: np.ndarray, params: ModelParams):
    """Max-over-time pooled ReLU conv features plus the backward cache."""
    if V.shape[1] != params.d_in:
        raise ValueError(f"expected chunk dimension {params.d_in}, got {V.shape[1]}")
    V = _pad_chunks(V, max(params.widths))
    F = params.n_filters
    feats = np.empty(F * len(params.widths))
    cache = []
    for j, w in enumerate(params.widths):
        windows = sliding_window_view(V, (w, V.shape[1]))[:, 0]          # (n_win, w, d)
        flat = windows.reshape(windows.shape[0], -1)                      # (n_win, w*d)
        filt = params.arrays[f"conv_w:{w}"].reshape(F, -1)
        pre = flat @ filt.T + params.arrays[f"conv_b:{w}"]                # (n_win, F)
        act = np.maximum(pre, 0.0)
        best = act.argmax(axis=0)                                         # first index on ties
        feats[j * F : (j + 1) * F] = act[best, np.arange(F)]
        cache.append((flat, pre, best))
    return feats, cache


def forward_page(chunk_vectors: np.ndarray, params: ModelParams | LinearParams, url: str = "") -> PagePrediction:
    """Label probabilities for one page given its chunk-vector sequence."""
    V = np.asarray(chunk_vectors, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] < 1:
        raise ValueError(f"need at least one chunk vector, got shape {V.shape}")
    if params.arch == "linear":
        return linear_baseline_forward(V, params, url=url)
    feats, _ = _conv_features(V, params)
    z = params.arrays["out_w"] @ feats + params.arrays["out_b"]
    return PagePrediction(url=url, probs=sigmoid(z))


def linear_baseline_forward(chunk_vectors: np.ndarray, params: LinearParams, url: str = "") -> PagePrediction:
    """CNN-free variant: page vector = mean of chunk vectors, then sigmoid."""
    V = np.asarray(chunk_vectors, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] < 1:
        raise ValueError(f"need at least one chunk vector, got shape {V.shape}")
    if V.shape[1] != params.d_in:
        raise ValueError(f"expected chunk dimension {params.d_in}, got {V.shape[1]}")
    v = V.mean(axis=0)
    z = params.arrays["out_w"] @ v + params.arrays["out_b"]
    return PagePrediction(url=url, probs=sigmoid(z))


def forward_site(pages: list[PagePrediction], domain: str = "") -> SitePrediction:
    """Site probabilities: elementwise arithmetic mean over page predictions."""
    if not pages:
        raise ValueError("no pages")
    probs = np.mean([p.probs for p in pages], axis=0)
    return SitePrediction(domain=domain, probs=probs, per_page=list(pages))


def predict_site(site: SiteDocument, params, table: EmbeddingTable) -> SitePrediction:
    pages = [forward_page(encode_page(p.chunks, table), params, url=p.url) for p in site.pages]
    return forward_site(pages, domain=site.domain)


# --------------------------------------------------------------------------
# Loss and gradient
# --------------------------------------------------------------------------


def loss(probs: np.ndarray, targets: np.ndarray) -> float:
    """Mean binary cross-entropy over classes, probabilities clamped to
    [LOSS_EPS, 1 - LOSS_EPS]."""
    p = np.asarray(probs, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: probs {p.shape} vs targets {t.shape}")
    p = np.clip(p, LOSS_EPS, 1.0 - LOSS_EPS)
    return float(np.mean(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))))


def _zero_grads(params) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.arrays.items()}


def _page_grad_cnn(V: np.ndarray, targets: np.ndarray, params: ModelParams, grads: dict) -> float:
    feats, cache = _conv_features(V, params)
    z = params.arrays["out_w"] @ feats + params.arrays["out_b"]
    p = sigmoid(z)
    C = params.n_classes
    # d(loss)/dz = (p - t)/C while the clamp is inactive, 0 where it saturates
    live = (p > LOSS_EPS) & (p < 1.0 - LOSS_EPS)
    dz = np.where(live, (p - targets) / C, 0.0)
    grads["out_w"] += np.outer(dz, feats)
    grads["out_b"] += dz
    g_feat = params.arrays["out_w"].T @ dz
    F = params.n_filters
    for j, w in enumerate(params.widths):
        flat, pre, best = cache[j]
        g = g_feat[j * F : (j + 1) * F]
        alive = pre[best, np.arange(F)] > 0.0      # ReLU subgradient 0 at 0
        gw = np.where(alive, g, 0.0)
        grads[f"conv_b:{w}"] += gw
        grads[f"conv_w:{w}"] += (gw[:, None] * flat[best]).reshape(F, w, params.d_in)
    return loss(p, targets)


def _page_grad_linear(V: np.ndarray, targets: np.ndarray, params: LinearParams, grads: dict) -> float:
    v = V.mean(axis=0)
    z = params.arrays["out_w"] @ v + params.arrays["out_b"]
    p = sigmoid(z)
    live = (p > LOSS_EPS) & (p < 1.0 - LOSS_EPS)
    dz = np.where(live, (p - targets) / params.n_classes, 0.0)
    grads["out_w"] += np.outer(dz, v)
    grads["out_b"] += dz
    return loss(p, targets)


def grad(batch: list[tuple[np.ndarray, np.ndarray]], params) -> tuple[dict[str, np.ndarray], float]:
    """Exact analytic gradient of the mean batch loss, plus that loss.

    Max-pooling routes gradient to the (first) argmax window; summation is
    in batch-index order for determinism.
    """
    if not batch:
        raise ValueError("empty batch")
    grads = _zero_grads(params)
    total = 0.0
    step = _page_grad_linear if params.arch == "linear" else _page_grad_cnn
    for V, targets in batch:
        total += step(np.asarray(V, dtype=np.float64), np.asarray(targets, dtype=np.float64), params, grads)
    n = len(batch)
    for key in grads:
        grads[key] /= n
    return grads, total / n


# --------------------------------------------------------------------------
# Training
# --------------------------------------------------------------------------


def _site_targets(site: SiteDocument, spec: FacetSpec) -> np.ndarray | None:
    labels = site.labels.get(spec.facet, set())
    if not labels:
        return None
    unknown = labels - set(spec.labels)
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} outside facet {spec.facet!r} label space")
    targets = np.zeros(spec.n_classes)
    for lbl in labels:
        targets[spec.labels.index(lbl)] = 1.0
    return targets


def training_pages(
    sites: list[SiteDocument], spec: FacetSpec, table: EmbeddingTable
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pages are the training units; site labels are broadcast to each page."""
    out = []
    for site in sites:
        targets = _site_targets(site, spec)
        if targets is None:
            continue
        for page in site.pages:
            out.append((encode_page(page.chunks, table), targets))
    return out


def train(
    sites: list[SiteDocument],
    spec: FacetSpec,
    config: ModelConfig,
    table: EmbeddingTable,
    vocab: Vocabulary | None = None,
) -> ModelParams | LinearParams:
    """Mini-batch gradient descent; deterministic given config.seed."""
    pages = training_pages(sites, spec, table)
    if not pages:
        raise ValueError("empty training set")
    rng = np.random.default_rng(config.seed)
    params = init_params(spec, table.dimension, config, rng)
    params.vocab = vocab
    n = len(pages)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            batch = [pages[i] for i in order[start : start + config.batch_size]]
            grads, batch_loss = grad(batch, params)
            epoch_losses.append(batch_loss)
            if config.learning_rate != 0.0:
                for key, g in grads.items():
                    params.arrays[key] -= config.learning_rate * g
        params.loss_history.append(float(np.mean(epoch_losses)))
    return params


# --------------------------------------------------------------------------
# Serialization (bitwise round-trip)
# --------------------------------------------------------------------------

_MODEL_FORMAT = "facetseg-model"


def _config_to_dict(config: ModelConfig | None) -> dict | None:
    if config is None:
        return None
    return {
        "widths": list(config.widths),
        "n_filters": config.n_filters,
        "learning_rate": config.learning_rate,
        "batch_size": config.batch_size,
        "epochs": config.epochs,
        "seed": config.seed,
        "arch": config.arch,
    }


def _config_from_dict(d: dict | None) -> ModelConfig | None:
    if d is None:
        return None
    return ModelConfig(
        widths=tuple(d["widths"]),
        n_filters=d["n_filters"],
        learning_rate=d["learning_rate"],
        batch_size=d["batch_size"],
        epochs=d["epochs"],
        seed=d["seed"],
        arch=d["arch"],
    )


def save_model(params: ModelParams | LinearParams, path: str | Path) -> None:
    payload = {
        "format": _MODEL_FORMAT,
        "version": 1,
        "arch": params.arch,
        "facet": {"facet": params.facet.facet, "labels": params.facet.labels},
        "d_in": params.d_in,
        "widths": list(params.widths) if params.arch == "cnn" else None,
        "n_filters": params.n_filters if params.arch == "cnn" else None,
        "arrays": {k: v.tolist() for k, v in params.arrays.items()},
        "loss_history": params.loss_history,
        "vocab": params.vocab.to_dict() if params.vocab else None,
        "config": _config_to_dict(params.config),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8")


def load_model(path: str | Path) -> ModelParams | LinearParams:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != _MODEL_FORMAT:
        raise ValueError(f"{path}: not a model file")
    spec = FacetSpec(facet=payload["facet"]["facet"], labels=list(payload["facet"]["labels"]))
    arrays = {k: np.asarray(v, dtype=np.float64) for k, v in payload["arrays"].items()}
    vocab = Vocabulary.from_dict(payload["vocab"]) if payload.get("vocab") else None
    config = _config_from_dict(payload.get("config"))
    if payload["arch"] == "linear":
        return LinearParams(
            facet=spec, d_in=payload["d_in"], arrays=arrays,
            loss_history=list(payload["loss_history"]), vocab=vocab, config=config,
        )
    return ModelParams(
        facet=spec,
        d_in=payload["d_in"],
        widths=tuple(payload["widths"]),
        n_filters=payload["n_filters"],
        arrays=arrays,
        loss_history=list(payload["loss_history"]),
        vocab=vocab,
        config=config,
    )


def params_equal(a, b) -> bool:
    if a.arch != b.arch or a.arrays.keys() != b.arrays.keys():
        return False
    return all(np.array_equal(a.arrays[k], b.arrays[k]) for k in a.arrays)
