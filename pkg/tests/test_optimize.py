import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from wikirank.graph import SemanticGraph, UnknownNodeError
from wikirank.optimize import (
    ExtractionConfig,
    GraphTooLargeError,
    brute_force_extract,
    concept_score,
    greedy_extract,
    objective,
    prune,
)

from conftest import random_graph, small_graph


def score_oracle(w, d):
    return sum(w / 2 ** i for i in range(d))


def objective_oracle(g, omega):
    total = 0.0
    for c in g.concepts:
        d = sum(1 for p in omega if c.id in g.phrase(p).concepts)
        total += score_oracle(c.weight, d)
    return total


@pytest.mark.parametrize("d, expected", [(0, 0.0), (1, 16.0), (2, 24.0), (3, 28.0)])
def test_concept_score_disease_weight(d, expected):
    assert concept_score(16, d) == expected


def test_concept_score_matches_loop():
    for w in range(0, 17):
        for d in range(0, 12):
            assert concept_score(w, d) == score_oracle(w, d)


def test_concept_score_rejects_negative():
    with pytest.raises(ValueError):
        concept_score(-1, 2)


def test_objective_examples():
    g = small_graph()
    assert objective(g, []) == 0
    assert objective(g, {"p1", "p2"}) == 9.0
    assert objective(g, {"p2", "p3"}) == 8.5
    assert objective(g, {"p1", "p3"}) == 7.0
    with pytest.raises(UnknownNodeError):
        objective(g, {"p9"})


def test_objective_matches_oracle(rng):
    for _ in range(100):
        g = random_graph(rng)
        ids = [p.id for p in g.phrases]
        omega = rng.sample(ids, rng.randint(0, len(ids)))
        assert math.isclose(objective(g, omega), objective_oracle(g, omega), rel_tol=1e-12)


def test_greedy_small_instance():
    result = greedy_extract(small_graph(), ExtractionConfig(k=2))
    assert result.phrases == ("p2", "p1")
    assert result.gains == (7.0, 2.0)
    assert result.objective_value == 9.0


def test_greedy_k1_is_argmax(rng):
    for _ in range(50):
        g = random_graph(rng)
        w = g.weights()
        best = max((sum(w[c] for c in p.concepts) for p in g.phrases), default=0)
        result = greedy_extract(g, ExtractionConfig(k=1))
        if best == 0:
            assert result.phrases == ()
        else:
            [pid] = result.phrases
            assert sum(w[c] for c in g.phrase(pid).concepts) == best


def test_greedy_no_edges():
    g = SemanticGraph.from_parts([("a", "a", 0), ("b", "b", 1)], {"c": 3}, [])
    result = greedy_extract(g, ExtractionConfig(k=5))
    assert result.phrases == () and result.objective_value == 0


def test_greedy_pad_to_k():
    g = SemanticGraph.from_parts([("a", "a", 0), ("b", "b", 1), ("z", "z", 2)], {"c": 3}, [("b", "c")])
    assert greedy_extract(g, ExtractionConfig(k=3)).phrases == ("b",)
    padded = greedy_extract(g, ExtractionConfig(k=3, pad_to_k=True))
    assert padded.phrases == ("b", "a", "z")
    assert padded.objective_value == 3.0


def test_greedy_never_reselects():
    # one phrase dominating every concept would win forever without exclusion
    g = SemanticGraph.from_parts([("big", "big", 0), ("small", "small", 1)], {"x": 8, "y": 8},
                                 [("big", "x"), ("big", "y"), ("small", "x")])
    result = greedy_extract(g, ExtractionConfig(k=3))
    assert result.phrases == ("big", "small")


def test_greedy_tie_breaks():
    g = SemanticGraph.from_parts([("zeta", "zeta", 0), ("alpha", "alpha", 5)], {"a": 2, "b": 2},
                                 [("zeta", "a"), ("alpha", "b")])
    assert greedy_extract(g, ExtractionConfig(k=1)).phrases == ("zeta",)
    assert greedy_extract(g, ExtractionConfig(k=1, tie_break="lexicographic")).phrases == ("alpha",)


def test_greedy_does_not_mutate_graph():
    g = small_graph()
    before = g.weights()
    greedy_extract(g, ExtractionConfig(k=3))
    assert g.weights() == before


def test_brute_force_small_instance():
    result = brute_force_extract(small_graph(), 2)
    assert set(result.phrases) == {"p1", "p2"}
    assert result.objective_value == 9.0


def test_brute_force_all_fresh_concepts():
    g = SemanticGraph.from_parts([(f"p{i}", "", i) for i in range(4)], {f"c{i}": i + 1 for i in range(4)},
                                 [(f"p{i}", f"c{i}") for i in range(4)])
    assert brute_force_extract(g, 10).phrases == ("p0", "p1", "p2", "p3")


def test_brute_force_empty_and_guard():
    empty = SemanticGraph.from_parts([], {}, [])
    assert brute_force_extract(empty, 3).phrases == ()
    big = SemanticGraph.from_parts([(f"p{i}", "", i) for i in range(21)], {}, [])
    with pytest.raises(GraphTooLargeError):
        brute_force_extract(big, 2)


def test_brute_force_matches_enumeration(rng):
    for _ in range(40):
        g = random_graph(rng, max_phrases=8, max_concepts=6)
        k = rng.randint(1, 4)
        ids = [p.id for p in g.phrases]
        best = max(
            objective_oracle(g, s)
            for r in range(0, min(k, len(ids)) + 1)
            for s in itertools.combinations(ids, r)
        )
        assert brute_force_extract(g, k).objective_value == pytest.approx(best, rel=1e-12)


def gain(g, p, omega):
    return objective(g, set(omega) | {p}) - objective(g, omega)


def test_monotone_and_submodular(rng):
    for _ in range(300):
        g = random_graph(rng)
        ids = [p.id for p in g.phrases]
        big = set(rng.sample(ids, rng.randint(0, len(ids))))
        small = set(rng.sample(sorted(big), rng.randint(0, len(big))))
        assert objective(g, small) <= objective(g, big) + 1e-12
        for p in set(ids) - big:
            assert gain(g, p, small) >= gain(g, p, big) - 1e-12


@st.composite
def graphs(draw):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_graph(random.Random(seed))


@settings(max_examples=150, deadline=None)
@given(graphs(), st.integers(1, 4))
def test_greedy_approximation_bound(g, k):
    greedy = greedy_extract(g, ExtractionConfig(k=k))
    best = brute_force_extract(g, k)
    assert greedy.objective_value >= (1 - 1 / math.e) * best.objective_value - 1e-9
    assert greedy.objective_value <= best.objective_value + 1e-9
    assert len(set(greedy.phrases)) == len(greedy.phrases) <= k
    assert math.isclose(math.fsum(greedy.gains), greedy.objective_value, rel_tol=1e-9, abs_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(graphs(), st.integers(1, 6))
def test_greedy_deterministic(g, k):
    cfg = ExtractionConfig(k=k)
    assert greedy_extract(g, cfg) == greedy_extract(g, cfg)


def test_prune_step1_isolated():
    g = SemanticGraph.from_parts([("cattle feed", "cattle feed", 0), ("bse", "BSE", 5)], {"BSE": 3},
                                 [("bse", "BSE")])
    pruned = prune(g)
    assert [p.id for p in pruned.phrases] == ["bse"]


def test_prune_step2_single_rare_concept():
    g = SemanticGraph.from_parts(
        [("poultry feed", "poultry feed", 0), ("feed ban", "feed ban", 1), ("bse", "BSE", 2)],
        {"Poultry feed": 1, "Ban (law)": 3, "BSE": 5},
        [("poultry feed", "Poultry feed"), ("feed ban", "Poultry feed"), ("feed ban", "Ban (law)"),
         ("bse", "BSE")],
    )
    pruned = prune(g)
    # a two-concept phrase survives even though one of its concepts is rare
    assert [p.id for p in pruned.phrases] == ["feed ban", "bse"]
    assert pruned.concept("Poultry feed").weight == 1


def test_prune_step3_fan_out():
    # five single-concept phrases on c, m=3: by first occurrence the last two go
    phrases = [(f"s{i}", f"s{i}", i) for i in range(5)]
    g = SemanticGraph.from_parts(phrases, {"c": 4}, [(f"s{i}", "c") for i in range(5)])
    pruned = prune(g, ExtractionConfig(m=3))
    assert [p.id for p in pruned.phrases] == ["s0", "s1", "s2"]


def test_prune_step3_keeps_multi_concept_phrases():
    phrases = [(f"s{i}", f"s{i}", i) for i in range(5)] + [("multi", "multi", 9)]
    edges = [(f"s{i}", "c") for i in range(5)] + [("multi", "c"), ("multi", "d")]
    g = SemanticGraph.from_parts(phrases, {"c": 4, "d": 2}, edges)
    pruned = prune(g, ExtractionConfig(m=3))
    # multi ranks first (score 6); two single-concept phrases fill the remaining slots
    assert [p.id for p in pruned.phrases] == ["s0", "s1", "multi"]


def test_prune_step3_ranking_by_hand():
    # concept c with 5 single-concept phrases of equal score plus 2 multi-concept ones; m=4
    # ranking: mA (4+5), mB (4+1), s0, s1, s2, s3, s4 -> s2, s3, s4 are below 4th place
    phrases = [(f"s{i}", f"s{i}", 10 + i) for i in range(5)] + [("mA", "mA", 30), ("mB", "mB", 31)]
    edges = [(f"s{i}", "c") for i in range(5)] + [("mA", "c"), ("mA", "x"), ("mB", "c"), ("mB", "y")]
    g = SemanticGraph.from_parts(phrases, {"c": 4, "x": 5, "y": 2}, edges)
    kept = [p.id for p in prune(g, ExtractionConfig(m=4)).phrases]
    assert kept == ["s0", "s1", "mA", "mB"]


def test_prune_leaves_weights_alone(rng):
    for _ in range(50):
        g = random_graph(rng)
        pruned = prune(g)
        for c in pruned.concepts:
            assert c.weight == g.concept(c.id).weight
            assert c.phrases


def with_isolated(g, rng):
    extra = [(f"iso{i}", f"iso {i}", rng.randint(0, 200)) for i in range(rng.randint(1, 4))]
    return SemanticGraph.from_parts(
        [(p.id, p.surface, p.first_occurrence) for p in g.phrases] + extra, g.weights(), g.edges
    )


def test_step1_safety(rng):
    for _ in range(200):
        g = with_isolated(random_graph(rng), rng)
        for k in (1, 3, 10):
            cfg = ExtractionConfig(k=k)
            assert greedy_extract(prune(g, cfg, steps=(1,)), cfg).phrases == greedy_extract(g, cfg).phrases


def test_config_validation():
    with pytest.raises(ValueError):
        ExtractionConfig(k=0)
    with pytest.raises(ValueError):
        ExtractionConfig(m=0)
    with pytest.raises(ValueError):
        ExtractionConfig(tie_break="random")
