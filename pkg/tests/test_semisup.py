import pytest

from facetseg.evaluation import split_by_domain
from facetseg.model import ModelConfig, facet_spec_from_sites, params_equal, train
from facetseg.semisup import pseudo_label, run_rounds
from facetseg.synth import SynthConfig, make_embedding_table, make_sites

INTERNAL_STYLE = dict(signal=0.45, center_scale=2.0)
# External sites are cleaner and single-industry, like curated encyclopedia
# companies: pseudo-labels over them stay precise.
EXTERNAL_STYLE = dict(signal=0.7, center_scale=2.0, second_industry_prob=0.0)


@pytest.fixture(scope="module")
def setup():
    cfg = SynthConfig(n_sites=60, seed=5, **INTERNAL_STYLE)
    internal = make_sites(cfg)
    table = make_embedding_table(cfg)
    external = make_sites(SynthConfig(n_sites=50, seed=99, domain_prefix="e", **EXTERNAL_STYLE))
    spec = facet_spec_from_sites(internal, "industry")
    split = split_by_domain(sorted(s.domain for s in internal), seed=17)
    return internal, external, table, spec, split


class TestPseudoLabel:
    def test_threshold_rule(self):
        assert pseudo_label({"A": 0.9, "B": 0.3}, 0.8) == {"A"}

    def test_none_when_all_below(self):
        assert pseudo_label({"A": 0.5, "B": 0.3}, 0.8) is None

    def test_exact_tau_included(self):
        assert pseudo_label({"A": 0.8}, 0.8) == {"A"}

    def test_tau_bounds(self):
        with pytest.raises(ValueError):
            pseudo_label({"A": 0.5}, 1.0)


class TestRunRounds:
    def test_single_round_is_plain_training(self, setup):
        internal, external, table, spec, split = setup
        config = ModelConfig(seed=7)
        params, state = run_rounds(internal, external, spec, split, rounds=1, config=config, table=table)
        internal_train = sorted(
            (s for s in internal if s.domain in split.train_domains), key=lambda s: s.domain
        )
        direct = train(internal_train, spec, config, table)
        assert params_equal(params, direct)
        assert state.round == 0
        assert len(state.history) == 1

    def test_extreme_tau_admits_nothing(self, setup):
        internal, external, table, spec, split = setup
        config = ModelConfig(seed=7)
        params, state = run_rounds(
            internal, external, spec, split, rounds=2, tau=0.999999, config=config, table=table
        )
        assert state.pseudo_labeled == {}
        round0, _ = run_rounds(internal, external, spec, split, rounds=1, config=config, table=table)
        assert params_equal(params, round0)

    def test_heldout_f1_non_decreasing_with_clean_external(self, setup):
        internal, external, table, spec, split = setup
        _, state = run_rounds(
            internal, external, spec, split, rounds=3, tau=0.8, config=ModelConfig(seed=7), table=table
        )
        f1s = [r.micro_f1 for r in state.history]
        assert len(f1s) == 3
        assert f1s[-1] >= f1s[0]
        assert state.pseudo_labeled  # threshold admitted something

    def test_internal_train_ids_frozen_and_disjoint_from_test(self, setup):
        internal, external, table, spec, split = setup
        _, state = run_rounds(
            internal, external, spec, split, rounds=3, tau=0.8, config=ModelConfig(seed=7), table=table
        )
        assert state.internal_train_ids == frozenset(split.train_domains)
        assert not set(state.pseudo_labeled) & split.test_domains
        assert not set(state.pseudo_labeled) & split.train_domains

    def test_empty_external_bitwise_equals_plain_training(self, setup):
        internal, _, table, spec, split = setup
        config = ModelConfig(seed=7)
        with pytest.warns(UserWarning, match="no external"):
            params, state = run_rounds(internal, [], spec, split, rounds=2, config=config, table=table)
        internal_train = sorted(
            (s for s in internal if s.domain in split.train_domains), key=lambda s: s.domain
        )
        direct = train(internal_train, spec, config, table)
        assert params_equal(params, direct)

    def test_test_domains_never_trained_on(self, setup):
        internal, external, table, spec, split = setup
        # externals sharing a test domain must be dropped
        clash = [s for s in internal if s.domain in split.test_domains][:2]
        _, state = run_rounds(
            internal, external + clash, spec, split, rounds=2, tau=0.5,
            config=ModelConfig(seed=7), table=table,
        )
        assert not set(state.pseudo_labeled) & split.test_domains

    def test_deterministic_given_seed(self, setup):
        internal, external, table, spec, split = setup
        a, sa = run_rounds(internal, external, spec, split, rounds=2, config=ModelConfig(seed=11), table=table)
        b, sb = run_rounds(internal, external, spec, split, rounds=2, config=ModelConfig(seed=11), table=table)
        assert params_equal(a, b)
        assert [r.micro_f1 for r in sa.history] == [r.micro_f1 for r in sb.history]
