import math

import numpy as np
import pytest

from facetseg.concept import (
    LinkGraph,
    barabasi_albert,
    cond_prob,
    jaccard,
    load_link_graph,
    milne_witten,
    pmi,
)
from facetseg.concept.graphdata import save_link_graph
from facetseg.concept.measures import DegenerateGraphError


def graph_from_sizes(n_a, n_b, n_inter, w):
    """A graph where a and b have given inlink-set sizes and overlap."""
    entities = {f"e{i}" for i in range(w)}
    inter = {f"e{i}" for i in range(n_inter)}
    only_a = {f"e{100 + i}" for i in range(n_a - n_inter)}
    only_b = {f"e{200 + i}" for i in range(n_b - n_inter)}
    entities |= only_a | only_b | {"a", "b"}
    # pad to exactly w entities
    entities = set(sorted(entities)[:0]) | entities
    extra = w - len(entities)
    entities |= {f"pad{i}" for i in range(max(0, extra))}
    g = LinkGraph(entities=entities, inlinks={"a": inter | only_a, "b": inter | only_b})
    return g


class TestMilneWitten:
    def test_hand_computed(self):
        g = LinkGraph(
            entities={f"e{i}" for i in range(100)} | {"a", "b"},
            inlinks={
                "a": {f"e{i}" for i in range(10)},
                "b": {f"e{i}" for i in range(5)} | {f"e{50 + i}" for i in range(15)},
            },
        )
        # |A|=10, |B|=20, inter=5, W=102: close to the ln4/ln10 shape
        expected = 1 - (math.log(20) - math.log(5)) / (math.log(g.W) - math.log(10))
        assert milne_witten("a", "b", g) == pytest.approx(expected, abs=1e-12)

    def test_identical_sets_full_relatedness(self):
        g = LinkGraph(entities={"a", "b", "x", "y", "z"}, inlinks={"a": {"x", "y"}, "b": {"x", "y"}})
        assert milne_witten("a", "b", g) == 1.0

    def test_disjoint_sets_zero(self):
        g = LinkGraph(entities={"a", "b", "x", "y"}, inlinks={"a": {"x"}, "b": {"y"}})
        assert milne_witten("a", "b", g) == 0.0

    def test_degenerate_graph(self):
        g = LinkGraph(entities={"a", "b"}, inlinks={"a": {"a", "b"}, "b": {"a", "b"}})
        with pytest.raises(DegenerateGraphError, match="degenerate"):
            milne_witten("a", "b", g)


class TestJaccard:
    def test_half_overlap(self):
        g = LinkGraph(
            entities={"a", "b", "1", "2", "3", "4"},
            inlinks={"a": {"1", "2", "3"}, "b": {"2", "3", "4"}},
        )
        assert jaccard("a", "b", g) == 0.5

    def test_identical(self):
        g = LinkGraph(entities={"a", "b", "x"}, inlinks={"a": {"x"}, "b": {"x"}})
        assert jaccard("a", "b", g) == 1.0

    def test_disjoint(self):
        g = LinkGraph(entities={"a", "b", "x", "y"}, inlinks={"a": {"x"}, "b": {"y"}})
        assert jaccard("a", "b", g) == 0.0

    def test_both_empty_zero_by_convention(self):
        g = LinkGraph(entities={"a", "b"}, inlinks={})
        assert jaccard("a", "b", g) == 0.0


class TestCondProb:
    def test_half(self):
        g = LinkGraph(
            entities={f"e{i}" for i in range(30)} | {"a", "b"},
            inlinks={
                "a": {f"e{i}" for i in range(10)},
                "b": {f"e{i}" for i in range(5)} | {f"e{20 + i}" for i in range(5)},
            },
        )
        assert cond_prob("a", "b", g) == 0.5

    def test_subset_one(self):
        g = LinkGraph(entities={"a", "b", "x", "y"}, inlinks={"a": {"x"}, "b": {"x", "y"}})
        assert cond_prob("a", "b", g) == 1.0

    def test_disjoint_zero(self):
        g = LinkGraph(entities={"a", "b", "x", "y"}, inlinks={"a": {"x"}, "b": {"y"}})
        assert cond_prob("a", "b", g) == 0.0

    def test_no_inlinks_error(self):
        g = LinkGraph(entities={"a", "b", "x"}, inlinks={"b": {"x"}})
        with pytest.raises(ValueError, match="no inlinks"):
            cond_prob("a", "b", g)

    def test_asymmetric(self):
        g = LinkGraph(
            entities={"a", "b", "x", "y", "z"},
            inlinks={"a": {"x"}, "b": {"x", "y", "z"}},
        )
        assert cond_prob("a", "b", g) == 1.0
        assert cond_prob("b", "a", g) == pytest.approx(1 / 3)


class TestPmi:
    def test_hand_computed(self):
        g = graph_from_sizes(10, 20, 5, 100)
        assert pmi("a", "b", g) == pytest.approx(math.log(5 * g.W / 200), abs=1e-12)

    def test_independence_point_zero(self):
        # |inter| * W == |A| * |B|  ->  ln 1 = 0
        g = LinkGraph(
            entities={f"e{i}" for i in range(14)} | {"a", "b"},
            inlinks={
                "a": {"e0", "e1", "e2", "e3"},
                "b": {"e0", "e4", "e5", "e6"},
            },
        )
        assert g.W == 16
        assert pmi("a", "b", g) == pytest.approx(0.0, abs=1e-12)

    def test_empty_intersection_zero(self):
        g = LinkGraph(entities={"a", "b", "x", "y"}, inlinks={"a": {"x"}, "b": {"y"}})
        assert pmi("a", "b", g) == 0.0


class TestBarabasiAlbert:
    def test_capped_at_one(self):
        g = graph_from_sizes(10, 20, 5, 100)
        assert barabasi_albert("a", "b", g) == 1.0

    def test_below_cap(self):
        g = graph_from_sizes(10, 20, 1, 100)
        expected = 1 * g.W / 200
        assert barabasi_albert("a", "b", g) == pytest.approx(min(1.0, expected), abs=1e-12)

    def test_disjoint_zero(self):
        g = LinkGraph(entities={"a", "b", "x", "y"}, inlinks={"a": {"x"}, "b": {"y"}})
        assert barabasi_albert("a", "b", g) == 0.0


# --------------------------------------------------------------------------
# Brute-force oracles: recompute everything from raw membership loops.
# --------------------------------------------------------------------------


def oracle_counts(g, a, b):
    A = g.inlinks.get(a, set())
    B = g.inlinks.get(b, set())
    inter = sum(1 for x in A if x in B)
    union = len(A) + len(B) - inter
    return len(A), len(B), inter, union, len(g.entities)


def oracle_measures(g, a, b):
    na, nb, inter, union, w = oracle_counts(g, a, b)
    out = {}
    out["jaccard"] = inter / union if union else 0.0
    out["cond_prob"] = inter / na if na else None
    if na and nb and w > min(na, nb):
        out["milne_witten"] = (
            0.0
            if inter == 0
            else max(0.0, 1 - (math.log(max(na, nb)) - math.log(inter)) / (math.log(w) - math.log(min(na, nb))))
        )
        out["pmi"] = 0.0 if inter == 0 else math.log(inter * w / (na * nb))
        out["barabasi_albert"] = 0.0 if inter == 0 else min(1.0, inter * w / (na * nb))
    return out


def random_graph(rng, n=30, max_inlinks=12):
    ids = [f"n{i:02d}" for i in range(n)]
    inlinks = {}
    for e in ids:
        size = int(rng.integers(0, max_inlinks + 1))
        if size:
            inlinks[e] = set(rng.choice(ids, size=size, replace=False))
    return LinkGraph(entities=set(ids), inlinks=inlinks)


class TestOracleEquivalence:
    def test_measures_match_brute_force(self):
        rng = np.random.default_rng(1234)
        pairs_checked = 0
        for _ in range(10):
            g = random_graph(rng)
            ids = sorted(g.entities)
            for a in ids[:12]:
                for b in ids[:12]:
                    if a == b:
                        continue
                    expected = oracle_measures(g, a, b)
                    A, B = g.inlink_set(a), g.inlink_set(b)
                    assert jaccard(a, b, g) == pytest.approx(expected["jaccard"], abs=1e-12)
                    if expected["cond_prob"] is not None:
                        assert cond_prob(a, b, g) == pytest.approx(expected["cond_prob"], abs=1e-12)
                    if "milne_witten" in expected:
                        assert milne_witten(a, b, g) == pytest.approx(expected["milne_witten"], abs=1e-12)
                        assert pmi(a, b, g) == pytest.approx(expected["pmi"], abs=1e-12)
                        assert barabasi_albert(a, b, g) == pytest.approx(expected["barabasi_albert"], abs=1e-12)
                        pairs_checked += 1
        assert pairs_checked > 100

    def test_symmetric_measures_exactly_symmetric(self):
        rng = np.random.default_rng(99)
        for _ in range(5):
            g = random_graph(rng)
            ids = [e for e in sorted(g.entities) if g.inlink_set(e)][:10]
            for a in ids:
                for b in ids:
                    if a == b:
                        continue
                    assert jaccard(a, b, g) == jaccard(b, a, g)
                    assert milne_witten(a, b, g) == milne_witten(b, a, g)
                    assert pmi(a, b, g) == pmi(b, a, g)
                    assert barabasi_albert(a, b, g) == barabasi_albert(b, a, g)


class TestLinkGraphIO:
    def test_roundtrip(self, tmp_path):
        g = LinkGraph(
            entities={"healthcare", "devices", "acme.com"},
            inlinks={"healthcare": {"devices"}, "acme.com": {"healthcare", "devices"}},
            cooc={("healthcare", "devices"): 7},
        )
        path = tmp_path / "links.jsonl"
        save_link_graph(g, path)
        loaded = load_link_graph(path)
        assert loaded.entities == g.entities
        assert loaded.inlinks == {k: v for k, v in g.inlinks.items() if v} | {"devices": set()}
        assert loaded.cooc == g.cooc

    def test_inlinks_must_reference_entities(self):
        with pytest.raises(ValueError, match="unknown entities"):
            LinkGraph(entities={"a"}, inlinks={"a": {"ghost"}})

    def test_loader_registers_referenced_entities(self, tmp_path):
        path = tmp_path / "links.jsonl"
        path.write_text('{"entity": "a", "inlinks": ["b", "c"]}\n')
        g = load_link_graph(path)
        assert g.entities == {"a", "b", "c"}
