import random
import time

import pytest
from hypothesis import given, settings, strategies as st

from kgtext.graph_metrics import (
    MODES,
    MatchMode,
    SizeLimitExceeded,
    align_graphs,
    brute_force_alignment,
    element_score,
    score_corpus,
    score_graphs,
)
from kgtext.model import KnowledgeGraph, Triple
from oracles import alignment_totals_oracle, triple_score_oracle
from strategies import graphs

WORDS = ["new", "york", "city", "paris", "born", "in", "capital", "of", "france", "a"]


def G(*rows):
    return KnowledgeGraph(tuple(Triple(*r) for r in rows))


def random_field(rng):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))


def random_graph(rng, k):
    return G(*[(random_field(rng), random_field(rng), random_field(rng)) for _ in range(k)])


class TestElementScore:
    def test_identical(self):
        t = Triple("A", "r", "B")
        for mode in MODES:
            assert element_score(t, t, mode) == 3.0

    def test_object_differs(self):
        assert element_score(Triple("A", "r", "B"), Triple("A", "r", "C"), MatchMode.EXACT) == 2.0

    def test_partial_overlap(self):
        score = element_score(Triple("new york city", "r", "B"), Triple("new york", "r", "B"), MatchMode.PARTIAL)
        assert score == 2.5

    def test_slots_matter_only_for_strict_and_ent_type(self):
        c, r = Triple("A", "r", "B"), Triple("B", "r", "A")
        assert element_score(c, r, MatchMode.EXACT) == 3.0
        assert element_score(c, r, MatchMode.PARTIAL) == 3.0
        assert element_score(c, r, MatchMode.STRICT) == 1.0
        assert element_score(c, r, MatchMode.ENT_TYPE) == 1.0

    def test_normalization_applies(self):
        assert element_score(Triple("New_York", "r", "B"), Triple("new york", "r", "B"), MatchMode.STRICT) == 3.0

    def test_against_exhaustive_oracle(self):
        rng = random.Random(3)
        for _ in range(500):
            c = tuple(random_field(rng) for _ in range(3))
            r = tuple(random_field(rng) for _ in range(3))
            for mode in MODES:
                assert element_score(Triple(*c), Triple(*r), mode) == triple_score_oracle(c, r, mode.value)


class TestAlignment:
    def test_identity_pairing(self):
        g = G(("a", "r", "b"), ("c", "r", "d"), ("e", "s", "f"))
        res = align_graphs(g, g)
        assert res.pairs == ((0, 0), (1, 1), (2, 2))
        assert res.total_score[MatchMode.EXACT] == 9.0

    def test_permuted(self):
        g = G(("a", "r", "b"), ("c", "r", "d"), ("e", "s", "f"))
        h = G(g[2], g[0], g[1])
        res = align_graphs(g, h)
        assert sorted(res.pairs) == [(0, 1), (1, 2), (2, 0)]
        assert brute_force_alignment(g, h).total_score[MatchMode.EXACT] == 9.0

    def test_ties_take_lowest_indices(self):
        g = G(("a", "r", "b"))
        h = G(("a", "r", "b"), ("a", "r", "b"))
        assert align_graphs(g, h).pairs == ((0, 0),)
        assert align_graphs(h, g).pairs == ((0, 0),)

    def test_zero_pairs_are_unmatched(self):
        res = align_graphs(G(("a", "r", "b"), ("x", "y", "z")), G(("a", "r", "b"), ("p", "q", "w")))
        assert res.pairs == ((0, 0),)

    def test_partial_matching(self):
        rng = random.Random(1)
        for _ in range(100):
            res = align_graphs(random_graph(rng, rng.randint(1, 6)), random_graph(rng, rng.randint(1, 6)))
            cs = [i for i, _ in res.pairs]
            rs = [j for _, j in res.pairs]
            assert len(set(cs)) == len(cs) and len(set(rs)) == len(rs)

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError):
            align_graphs(G(), G(("a", "r", "b")))

    def test_brute_force_size_limit(self):
        big = G(*[(f"s{i}", "r", "o") for i in range(9)])
        with pytest.raises(SizeLimitExceeded):
            brute_force_alignment(big, G(("a", "r", "b")))
        brute_force_alignment(G(*big.triples[:8]), G(("a", "r", "b")))

    @pytest.mark.parametrize("realign", [False, True])
    def test_matches_brute_force_and_recursive_oracle(self, realign):
        rng = random.Random(17 + realign)
        for _ in range(200):
            c, r = random_graph(rng, rng.randint(1, 4)), random_graph(rng, rng.randint(1, 4))
            fast = align_graphs(c, r, realign_per_mode=realign).total_score
            slow = brute_force_alignment(c, r, realign_per_mode=realign).total_score
            assert fast == slow
            ref = alignment_totals_oracle([tuple(t) for t in c], [tuple(t) for t in r], realign)
            assert {m.value: v for m, v in fast.items()} == ref

    def test_fifty_triples_fast(self):
        rng = random.Random(0)
        c, r = random_graph(rng, 50), random_graph(rng, 50)
        align_graphs(c, r)  # warm-up
        t0 = time.perf_counter()
        align_graphs(c, r)
        assert time.perf_counter() - t0 < 0.05

    def test_realign_can_only_raise_secondary_modes(self):
        rng = random.Random(4)
        for _ in range(100):
            c, r = random_graph(rng, 3), random_graph(rng, 3)
            shared = align_graphs(c, r).total_score
            own = align_graphs(c, r, realign_per_mode=True).total_score
            assert own[MatchMode.EXACT] == shared[MatchMode.EXACT]
            for m in MODES:
                assert own[m] >= shared[m]


class TestScoreGraphs:
    def test_identity(self):
        g = G(("a", "r", "b"), ("c", "s", "d"))
        rep = score_graphs(g, g)
        for m in MODES:
            assert (rep[m].precision, rep[m].recall, rep[m].f1) == (1.0, 1.0, 1.0)

    def test_one_object_wrong(self):
        rep = score_graphs(G(("A", "r", "B")), G(("A", "r", "C")))
        assert rep["exact"].f1 == pytest.approx(2 / 3)
        assert rep["exact"].precision == rep["exact"].recall == 2 / 3

    def test_empty_candidate(self):
        rep = score_graphs(G(), G(("a", "r", "b")))
        for m in MODES:
            assert (rep[m].precision, rep[m].recall, rep[m].f1) == (0.0, 0.0, 0.0)

    def test_unequal_sizes(self):
        rep = score_graphs(G(("a", "r", "b")), G(("a", "r", "b"), ("c", "s", "d")))
        assert rep["strict"].precision == 1.0
        assert rep["strict"].recall == 0.5

    def test_micro_and_macro(self):
        cands = [G(("a", "r", "b")), G(("x", "y", "z"), ("c", "s", "d"), ("e", "t", "f"))]
        refs = [G(("a", "r", "b")), G(("c", "s", "d"), ("e", "t", "f"), ("g", "u", "h"))]
        micro = score_corpus(cands, refs)["exact"]
        macro = score_corpus(cands, refs, macro=True)["exact"]
        assert micro.precision == pytest.approx(9 / 12)  # 3 + 6 over 3 * 4
        assert macro.precision == pytest.approx((1.0 + 2 / 3) / 2)
        with pytest.raises(ValueError):
            score_corpus(cands, refs[:1])


@settings(max_examples=100, deadline=None)
@given(graphs, graphs, st.randoms(use_true_random=False))
def test_order_invariance(c, r, rnd):
    shuffled_c = list(c.triples)
    shuffled_r = list(r.triples)
    rnd.shuffle(shuffled_c)
    rnd.shuffle(shuffled_r)
    a = score_graphs(c, r).as_dict()
    b = score_graphs(KnowledgeGraph(tuple(shuffled_c)), KnowledgeGraph(tuple(shuffled_r))).as_dict()
    assert a == b


@settings(max_examples=100, deadline=None)
@given(graphs, graphs)
def test_mode_ordering(c, r):
    t = align_graphs(c, r).total_score
    assert t[MatchMode.STRICT] <= t[MatchMode.EXACT] <= t[MatchMode.PARTIAL]


@settings(max_examples=100, deadline=None)
@given(graphs)
def test_self_f1_is_one(g):
    rep = score_graphs(g, g)
    assert all(rep[m].f1 == 1.0 for m in MODES)


@settings(max_examples=100, deadline=None)
@given(graphs, graphs)
def test_f1_is_harmonic_mean(c, r):
    for s in score_graphs(c, r).scores.values():
        assert 0.0 <= s.precision <= 1.0 and 0.0 <= s.recall <= 1.0
        expected = 0.0 if s.precision + s.recall == 0 else 2 * s.precision * s.recall / (s.precision + s.recall)
        assert s.f1 == pytest.approx(expected)
