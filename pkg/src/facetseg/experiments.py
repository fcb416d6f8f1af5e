"""Experiment harnesses: external-data ablation and label-source swap.

Both harnesses fix one internal train/test split and reuse it for every
arm, so reported differences come from the training data alone. They run
on any corpus; paired with the synthetic generator they reproduce the
protocols' directional effects at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import SiteDocument
from .embed import EmbeddingTable
from .evaluation import (
    DEFAULT_DECISION_THRESHOLD,
    MetricReport,
    evaluate_model,
    split_by_domain,
)
from .model import FacetSpec, ModelConfig, train
from .semisup import DEFAULT_ROUNDS, DEFAULT_TAU, run_rounds


@dataclass
class ExperimentConfig:
    split_seed: int = 17
    model: ModelConfig = field(default_factory=ModelConfig)
    rounds: int = DEFAULT_ROUNDS
    tau: float = DEFAULT_TAU
    threshold: float = DEFAULT_DECISION_THRESHOLD


@dataclass
class ExperimentResult:
    baseline: MetricReport
    variant: MetricReport

    def per_class_f1_delta(self) -> dict[str, float]:
        """variant minus baseline, per class."""
        return {
            label: self.variant.per_class_f1.get(label, 0.0) - f1
            for label, f1 in self.baseline.per_class_f1.items()
        }

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline.to_dict(),
            "variant": self.variant.to_dict(),
            "per_class_f1_delta": self.per_class_f1_delta(),
        }


def _check_same_test_domains(a: MetricReport, b: MetricReport) -> None:
    if a.test_domains != b.test_domains:
        raise AssertionError("experiment arms diverged on test domains")


def run_experiment_1(
    internal: list[SiteDocument],
    external: list[SiteDocument],
    spec: FacetSpec,
    table: EmbeddingTable,
    config: ExperimentConfig | None = None,
) -> ExperimentResult:
    """External-data ablation: internal-only vs internal plus pseudo-labeled
    external sites, on one shared split.

    The baseline arm is exactly round 0 of the pseudo-labeling loop (same
    split, same seed, same data), so a single loop yields both arms.
    """
    config = config or ExperimentConfig()
    split = split_by_domain(sorted(s.domain for s in internal), config.split_seed)
    _, state = run_rounds(
        internal,
        external,
        spec,
        split,
        rounds=config.rounds,
        tau=config.tau,
        config=config.model,
        table=table,
    )
    result = ExperimentResult(baseline=state.history[0], variant=state.history[-1])
    _check_same_test_domains(result.baseline, result.variant)
    return result


def run_experiment_2(
    internal: list[SiteDocument],
    external: list[SiteDocument],
    spec: FacetSpec,
    class_id: str,
    table: EmbeddingTable,
    config: ExperimentConfig | None = None,
) -> ExperimentResult:
    """Label-source swap for one class: internal-labeled training domains
    carrying the class are replaced by externally labeled domains.

    Both arms train on domain-sorted sets and score on the same internal
    test split; the per-class F1 of ``class_id`` is the headline number.
    """
    config = config or ExperimentConfig()
    if class_id not in spec.labels:
        raise ValueError(f"class {class_id!r} not in facet label space")
    if not any(class_id in s.labels.get(spec.facet, set()) for s in external):
        raise ValueError(f"class {class_id!r} absent from external corpus")

    split = split_by_domain(sorted(s.domain for s in internal), config.split_seed)
    internal_train = [s for s in internal if s.domain in split.train_domains]
    internal_test = sorted(
        (s for s in internal if s.domain in split.test_domains), key=lambda s: s.domain
    )

    arm_a = sorted(internal_train, key=lambda s: s.domain)

    excluded = {s.domain for s in internal_test}
    kept = [s for s in internal_train if class_id not in s.labels.get(spec.facet, set())]
    kept_ids = {s.domain for s in kept}
    swapped_in = [
        s
        for s in external
        if class_id in s.labels.get(spec.facet, set())
        and s.domain not in excluded
        and s.domain not in kept_ids
    ]
    arm_b = sorted(kept + swapped_in, key=lambda s: s.domain)

    params_a = train(arm_a, spec, config.model, table)
    report_a = evaluate_model(params_a, internal_test, table, config.threshold)
    params_b = train(arm_b, spec, config.model, table)
    report_b = evaluate_model(params_b, internal_test, table, config.threshold)
    result = ExperimentResult(baseline=report_a, variant=report_b)
    _check_same_test_domains(report_a, report_b)
    return result
