"""Selection algorithms against hand traces and the exhaustive oracle."""

import itertools
import random

import pytest

from subjkb.resemble import STGraph
from subjkb.selection import (
    run_algorithm,
    select_bgreedy,
    select_div_fgreedy,
    select_exact,
    select_fgreedy,
    select_random,
    selection_report,
)


from synth import make_graph, random_typed_graph, skewed_typed_graph


@pytest.fixture
def example_graph():
    """The four-pair worked example: one weight-1 edge, one weight-2 edge."""
    return make_graph(
        ["old@Politician", "young@President", "big@City", "large@City"],
        [
            ("old@Politician", "young@President", 1),
            ("big@City", "large@City", 2),
        ],
    )


class TestRandom:
    def test_full_selection_reaches_total_weight(self, example_graph):
        res = select_random(example_graph, k=4, seed=1)
        assert sorted(p.key for p in res.chosen) == sorted(v.key for v in example_graph.vertices)
        assert res.induced_weight == 3

    def test_seed_determinism(self, example_graph):
        a = select_random(example_graph, 2, seed=42)
        b = select_random(example_graph, 2, seed=42)
        assert a.chosen == b.chosen

    def test_empty_graph(self):
        res = select_random(STGraph((), ()), 3, seed=0)
        assert res.chosen == [] and res.induced_weight == 0


class TestFGreedy:
    def test_example_k2(self, example_graph):
        res = select_fgreedy(example_graph, 2)
        assert sorted(p.key for p in res.chosen) == ["big@City", "large@City"]
        assert res.induced_weight == 2
        # exhaustive check that 2 is optimal
        best = max(
            example_graph.induced_weight(s)
            for s in itertools.combinations(example_graph.vertices, 2)
        )
        assert best == 2

    def test_k1_tiebreak(self, example_graph):
        res = select_fgreedy(example_graph, 1)
        assert [p.key for p in res.chosen] == ["big@City"]
        assert res.induced_weight == 0

    def test_edgeless(self):
        g = make_graph(["a@T", "b@T", "c@T"], [])
        assert select_fgreedy(g, 2).induced_weight == 0

    def test_monotone_in_k(self):
        rng = random.Random(3)
        g = random_typed_graph(rng, 12, 3)
        weights = [select_fgreedy(g, k).induced_weight for k in range(1, 13)]
        assert weights == sorted(weights)


class TestBGreedy:
    def test_example_k2(self, example_graph):
        res = select_bgreedy(example_graph, 2)
        assert sorted(p.key for p in res.chosen) == ["big@City", "large@City"]
        assert res.induced_weight == 2

    def test_star_graph(self):
        g = make_graph(
            ["center@T", "leafa@T", "leafb@T", "leafc@T"],
            [("center@T", "leafa@T", 1), ("center@T", "leafb@T", 1), ("center@T", "leafc@T", 1)],
        )
        res = select_bgreedy(g, 2)
        assert res.induced_weight == 1
        assert "center@T" in {p.key for p in res.chosen}

    def test_k_equals_v(self, example_graph):
        res = select_bgreedy(example_graph, 4)
        assert res.induced_weight == 3

    def test_k_too_large(self, example_graph):
        with pytest.raises(ValueError):
            select_bgreedy(example_graph, 5)


class TestDivFGreedy:
    def test_example_delta_one(self, example_graph):
        res = select_div_fgreedy(example_graph, 2, delta=1.0)
        assert sorted(p.key for p in res.chosen) == ["big@City", "large@City"]

    def test_example_delta_half_caps_city(self, example_graph):
        res = select_div_fgreedy(example_graph, 2, delta=0.5)
        assert [p.key for p in res.chosen] == ["big@City", "old@Politician"]

    def test_cap_respected_at_scale(self):
        rng = random.Random(9)
        g = random_typed_graph(rng, 200, 10, p_edge=0.05)
        res = select_div_fgreedy(g, 100, delta=0.1)
        counts = {}
        for p in res.chosen:
            counts[p.type] = counts.get(p.type, 0) + 1
        assert all(c <= 10 for c in counts.values())
        assert len(counts) >= 10

    def test_cap_uses_exact_arithmetic(self):
        # floor(0.3 * 10) must be 3 even though 0.3*10 != 3.0 in floats
        g = make_graph([f"p{i}@T0" for i in range(10)], [])
        res = select_div_fgreedy(g, 10, delta=0.3)
        assert len(res.chosen) == 3
        assert res.shortfall

    def test_exhaustion_flagged(self):
        g = make_graph(["a@T", "b@T"], [])
        res = select_div_fgreedy(g, 5, delta=1.0)
        assert len(res.chosen) == 2 and res.shortfall


class TestExact:
    def test_example(self, example_graph):
        assert select_exact(example_graph, 2).induced_weight == 2

    def test_k_equals_v(self, example_graph):
        assert select_exact(example_graph, 4).induced_weight == 3

    def test_triangle(self):
        g = make_graph(
            ["a@T", "b@T", "c@T"],
            [("a@T", "b@T", 1), ("b@T", "c@T", 2), ("a@T", "c@T", 3)],
        )
        assert select_exact(g, 2).induced_weight == 3

    def test_size_guard(self):
        g = make_graph([f"p{i}@T" for i in range(21)], [])
        with pytest.raises(ValueError, match="refuses"):
            select_exact(g, 2)


class TestOracleDominance:
    def test_heuristics_never_beat_exact(self):
        rng = random.Random(101)
        for trial in range(120):
            n = rng.randint(3, 10)
            g = random_typed_graph(rng, n, rng.randint(1, 4), p_edge=0.4)
            k = rng.randint(2, min(4, n))
            best = select_exact(g, k).induced_weight
            for algo in ("random", "fgreedy", "bgreedy", "div-fgreedy"):
                res = run_algorithm(algo, g, k, delta=0.5, seed=trial)
                assert res.induced_weight <= best, (trial, algo)

    def test_fgreedy_usually_beats_random(self):
        g = skewed_typed_graph(random.Random(77))
        fg = select_fgreedy(g, 100).induced_weight
        wins = sum(
            1 for seed in range(100) if fg >= select_random(g, 100, seed=seed).induced_weight
        )
        assert wins >= 95

    def test_div_fgreedy_spreads_types_more_than_fgreedy(self):
        div_counts, fg_counts = [], []
        for trial in range(10):
            g = skewed_typed_graph(random.Random(trial))
            div_counts.append(select_div_fgreedy(g, 100, delta=0.1).type_count)
            fg_counts.append(select_fgreedy(g, 100).type_count)
        assert sum(div_counts) / len(div_counts) >= sum(fg_counts) / len(fg_counts)


class TestReport:
    def test_tsv_columns(self, example_graph):
        rows = [("fgreedy", select_fgreedy(example_graph, 2)), ("random", select_random(example_graph, 2, 0))]
        text = selection_report(rows)
        lines = text.strip().split("\n")
        assert lines[0] == "algo\tk\tweight\ttypes\tms"
        assert len(lines) == 3

    def test_timing_column_optional(self, example_graph):
        text = selection_report([("fgreedy", select_fgreedy(example_graph, 2))], include_timing=False)
        assert "ms" not in text.splitlines()[0]
