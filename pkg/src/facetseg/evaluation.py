"""Multi-label metrics and domain-level splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .corpus import SiteDocument
from .embed import EmbeddingTable
from .model import predict_site

DEFAULT_DECISION_THRESHOLD = 0.5
DEFAULT_TRAIN_FRACTION = 0.7


@dataclass
class SplitSpec:
    seed: int
    train_domains: set[str]
    test_domains: set[str]


@dataclass
class MetricReport:
    micro_f1: float
    micro_auc: float
    per_class_f1: dict[str, float]
    decision_threshold: float = DEFAULT_DECISION_THRESHOLD
    test_domains: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "micro_f1": self.micro_f1,
            "micro_auc": self.micro_auc,
            "per_class_f1": self.per_class_f1,
            "threshold": self.decision_threshold,
            "test_domains": self.test_domains,
        }


def split_by_domain(
    domains: list[str], seed: int, train_fraction: float = DEFAULT_TRAIN_FRACTION
) -> SplitSpec:
    """Deterministic shuffle; train gets floor(fraction * n) domains."""
    if len(domains) < 2:
        raise ValueError("need at least 2 domains")
    if len(set(domains)) != len(domains):
        raise ValueError("duplicate domains")
    rng = np.random.default_rng(seed)
    order = [domains[i] for i in rng.permutation(len(domains))]
    n_train = math.floor(len(domains) * train_fraction + 1e-9)
    return SplitSpec(
        seed=seed,
        train_domains=set(order[:n_train]),
        test_domains=set(order[n_train:]),
    )


def micro_f1(preds: dict[str, set[str]], gold: dict[str, set[str]]) -> float:
    """F1 with TP/FP/FN pooled over all (domain, label) pairs."""
    if preds.keys() != gold.keys():
        raise ValueError("prediction and gold key sets differ")
    tp = fp = fn = 0
    for key in gold:
        p, g = preds[key], gold[key]
        tp += len(p & g)
        fp += len(p - g)
        fn += len(g - p)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def micro_auc(scores: dict, gold: dict) -> float:
    """Rank-based AUC over pooled (domain, label) scores; ties count 0.5."""
    if scores.keys() != gold.keys():
        raise ValueError("score and gold key sets differ")
    keys = list(scores)
    y = np.array([1 if gold[k] else 0 for k in keys])
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("undefined AUC: need at least one positive and one negative")
    ranks = rankdata([scores[k] for k in keys])
    pos_rank_sum = float(ranks[y == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def decide_labels(probs: dict[str, float], threshold: float = DEFAULT_DECISION_THRESHOLD) -> set[str]:
    """Labels with probability >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    return {label for label, p in probs.items() if p >= threshold}


def binary_f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate_predictions(
    site_probs: dict[str, dict[str, float]],
    gold: dict[str, set[str]],
    labels: list[str],
    threshold: float = DEFAULT_DECISION_THRESHOLD,
) -> MetricReport:
    """Metric report at a decision threshold over per-site label probabilities."""
    preds = {d: decide_labels(p, threshold) for d, p in site_probs.items()}
    per_class = {}
    for label in labels:
        tp = sum(1 for d in gold if label in preds[d] and label in gold[d])
        fp = sum(1 for d in gold if label in preds[d] and label not in gold[d])
        fn = sum(1 for d in gold if label not in preds[d] and label in gold[d])
        per_class[label] = binary_f1(tp, fp, fn)
    scores = {(d, l): site_probs[d].get(l, 0.0) for d in gold for l in labels}
    truth = {(d, l): (1 if l in gold[d] else 0) for d in gold for l in labels}
    return MetricReport(
        micro_f1=micro_f1(preds, gold),
        micro_auc=micro_auc(scores, truth),
        per_class_f1=per_class,
        decision_threshold=threshold,
        test_domains=sorted(gold),
    )


def evaluate_model(
    params,
    sites: list[SiteDocument],
    table: EmbeddingTable,
    threshold: float = DEFAULT_DECISION_THRESHOLD,
) -> MetricReport:
    """Predict each site and score against its labels for the model's facet.

    Gold labels are intersected with the model's label space; labels the
    model cannot emit are not counted against it.
    """
    spec = params.facet
    space = set(spec.labels)
    site_probs = {}
    gold = {}
    for site in sites:
        pred = predict_site(site, params, table)
        site_probs[site.domain] = pred.probs_by_label(spec)
        gold[site.domain] = site.labels.get(spec.facet, set()) & space
    return evaluate_predictions(site_probs, gold, spec.labels, threshold)
