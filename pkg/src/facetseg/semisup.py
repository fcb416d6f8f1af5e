"""Iterative pseudo-labeling over external sites.

Round 0 trains on the fixed internal training subset only. Each later round
predicts on the external sites with the current model, admits labels above
a confidence threshold, and retrains from scratch on internal-train plus
the admitted pseudo-labeled sites. The internal subset never changes, and
held-out internal test domains never enter training.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .corpus import FacetLabels, SiteDocument
from .embed import EmbeddingTable
from .evaluation import MetricReport, SplitSpec, evaluate_model
from .model import FacetSpec, ModelConfig, predict_site, train

DEFAULT_TAU = 0.8
DEFAULT_ROUNDS = 3


@dataclass
class SemiSupState:
    round: int
    internal_train_ids: frozenset[str]
    pseudo_labeled: dict[str, tuple[set[str], float]] = field(default_factory=dict)
    history: list[MetricReport] = field(default_factory=list)


def pseudo_label(probs: dict[str, float], tau: float) -> set[str] | None:
    """Labels with probability >= tau; None when nothing clears the bar."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    admitted = {label for label, p in probs.items() if p >= tau}
    return admitted or None


def run_rounds(
    internal: list[SiteDocument],
    external: list[SiteDocument],
    spec: FacetSpec,
    split: SplitSpec,
    rounds: int = DEFAULT_ROUNDS,
    tau: float = DEFAULT_TAU,
    config: ModelConfig | None = None,
    table: EmbeddingTable | None = None,
):
    """Pseudo-labeling loop; returns (params, SemiSupState).

    ``split`` fixes the internal train/test partition for every round;
    ``state.history[r]`` is the held-out internal-test report after round r.
    Pseudo-labels are re-derived from fresh predictions each round, and
    each round retrains from scratch with the same seed, so the whole run
    is deterministic.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    if table is None:
        raise ValueError("embedding table required")
    config = config or ModelConfig()

    # Domain-sorted processing keeps runs independent of caller list order.
    internal_train = sorted(
        (s for s in internal if s.domain in split.train_domains), key=lambda s: s.domain
    )
    internal_test = sorted(
        (s for s in internal if s.domain in split.test_domains), key=lambda s: s.domain
    )
    train_ids = frozenset(s.domain for s in internal_train)
    test_ids = {s.domain for s in internal_test}
    external = sorted(
        (s for s in external if s.domain not in test_ids and s.domain not in train_ids),
        key=lambda s: s.domain,
    )
    if not external and rounds > 1:
        warnings.warn("no external sites: degenerating to round-0 training", stacklevel=2)

    state = SemiSupState(round=0, internal_train_ids=train_ids)
    params = train(internal_train, spec, config, table)
    state.history.append(evaluate_model(params, internal_test, table))

    for rnd in range(1, rounds):
        admitted: dict[str, tuple[set[str], float]] = {}
        pseudo_sites: list[SiteDocument] = []
        for site in external:
            pred = predict_site(site, params, table)
            probs = pred.probs_by_label(spec)
            labels = pseudo_label(probs, tau)
            if labels is None:
                continue
            confidence = min(probs[l] for l in labels)
            admitted[site.domain] = (labels, confidence)
            pseudo_sites.append(
                SiteDocument(
                    domain=site.domain,
                    pages=site.pages,
                    labels=FacetLabels({spec.facet: labels}),
                    label_source="pseudo",
                )
            )
        state.round = rnd
        state.pseudo_labeled = admitted
        params = train(internal_train + pseudo_sites, spec, config, table)
        state.history.append(evaluate_model(params, internal_test, table))

    return params, state
