"""Rule application, conflicts, fixpoint, and KB enrichment."""

import random

from subjkb.inference import (
    SOURCE_CLASSIFIER,
    SOURCE_CROWD,
    SOURCE_INFERENCE,
    SubjectiveFact,
    enrich,
    infer,
    infer_fixpoint,
    read_facts,
    write_facts,
)
from subjkb.kb import load_kb
from subjkb.pairs import STPair
from subjkb.resemble import NEGATIVE, POSITIVE, ResembleEdge, STGraph, build_graph

from synth import make_graph


def fact(entity, key, label, source=SOURCE_CROWD, confidence=1.0):
    prop, _, typ = key.partition("@")
    return SubjectiveFact(entity, STPair(prop, typ), label, source, confidence)


def graph_with_polarity(vertex_ids, edges):
    """edges: (key_a, key_b, polarity, shared_entities)."""
    vertices = {}
    for key in vertex_ids:
        prop, _, typ = key.partition("@")
        vertices[key] = STPair(prop, typ)
    edge_objs = tuple(
        ResembleEdge(vertices[a], vertices[b], pol, frozenset(shared))
        for a, b, pol, shared in edges
    )
    return STGraph(tuple(sorted(vertices.values())), edge_objs)


class TestInferOneHop:
    def test_negative_edge_flips_label(self):
        g = graph_with_polarity(
            ["young@President", "old@Politician"],
            [("young@President", "old@Politician", NEGATIVE, {"Barack_Obama"})],
        )
        seeds = [fact("Barack_Obama", "young@President", True)]
        facts, report = infer(seeds, g)
        derived = [f for f in facts if f.source == SOURCE_INFERENCE]
        assert len(derived) == 1
        assert derived[0].st_pair.key == "old@Politician"
        assert derived[0].label is False
        assert derived[0].provenance == "Barack_Obama|young@President"
        assert report.inferred_count == 1

    def test_positive_edge_keeps_label(self):
        g = graph_with_polarity(
            ["big@City", "large@City"],
            [("big@City", "large@City", POSITIVE, {"New_York", "Los_Angeles"})],
        )
        facts, _ = infer([fact("New_York", "big@City", True)], g)
        derived = [f for f in facts if f.source == SOURCE_INFERENCE]
        assert [(f.entity, f.st_pair.key, f.label) for f in derived] == [
            ("New_York", "large@City", True)
        ]

    def test_entity_not_shared_no_derivation(self):
        g = graph_with_polarity(
            ["big@City", "large@City"],
            [("big@City", "large@City", POSITIVE, {"Los_Angeles"})],
        )
        facts, report = infer([fact("New_York", "big@City", True)], g)
        assert report.inferred_count == 0

    def test_isolated_pair_passes_through(self):
        g = make_graph(["big@City"], [])
        seeds = [fact("New_York", "big@City", True)]
        facts, report = infer(seeds, g)
        assert facts == seeds
        assert report.inferred_count == 0

    def test_one_hop_does_not_chain(self):
        g = graph_with_polarity(
            ["a@T", "b@T", "c@T"],
            [
                ("a@T", "b@T", POSITIVE, {"e"}),
                ("b@T", "c@T", POSITIVE, {"e"}),
            ],
        )
        facts, report = infer([fact("e", "a@T", True)], g)
        keys = {f.st_pair.key for f in facts}
        assert keys == {"a@T", "b@T"}  # c is two hops away

    def test_derived_conflict_with_seed_keeps_seed(self):
        g = graph_with_polarity(
            ["a@T", "b@T"],
            [("a@T", "b@T", NEGATIVE, {"e"})],
        )
        seeds = [fact("e", "a@T", True), fact("e", "b@T", True)]
        facts, report = infer(seeds, g)
        cells = {(f.entity, f.st_pair.key): f.label for f in facts}
        assert cells == {("e", "a@T"): True, ("e", "b@T"): True}
        assert report.conflict_count >= 1

    def test_derived_vs_derived_conflict_suppresses_both(self):
        g = graph_with_polarity(
            ["a@T", "b@T", "c@T"],
            [
                ("a@T", "c@T", POSITIVE, {"e"}),
                ("b@T", "c@T", NEGATIVE, {"e"}),
            ],
        )
        seeds = [fact("e", "a@T", True), fact("e", "b@T", True)]
        facts, report = infer(seeds, g)
        assert all(f.st_pair.key != "c@T" for f in facts)
        assert report.conflict_count == 1
        entity, pair_key, ids = report.conflicts[0]
        assert (entity, pair_key) == ("e", "c@T")
        assert len(ids) == 2

    def test_no_silent_contradiction(self):
        rng = random.Random(31)
        for _ in range(50):
            n = rng.randint(2, 6)
            keys = [f"p{i}@T" for i in range(n)]
            edges = []
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.5:
                        pol = POSITIVE if rng.random() < 0.5 else NEGATIVE
                        shared = {f"e{k}" for k in range(rng.randint(1, 3))}
                        edges.append((keys[i], keys[j], pol, shared))
            g = graph_with_polarity(keys, edges)
            seeds = [
                fact(f"e{rng.randint(0, 2)}", rng.choice(keys), rng.random() < 0.5)
                for _ in range(rng.randint(1, 5))
            ]
            facts, _ = infer(seeds, g)
            cells = {}
            for f in facts:
                cell = (f.entity, f.st_pair.key)
                assert cell not in cells or cells[cell] == f.label
                cells[cell] = f.label

    def test_polarity_algebra_flip(self):
        g = graph_with_polarity(
            ["a@T", "b@T", "c@T"],
            [
                ("a@T", "b@T", POSITIVE, {"e"}),
                ("a@T", "c@T", NEGATIVE, {"e"}),
            ],
        )
        up, _ = infer([fact("e", "a@T", True)], g)
        down, _ = infer([fact("e", "a@T", False)], g)
        up_cells = {(f.entity, f.st_pair.key): f.label for f in up}
        down_cells = {(f.entity, f.st_pair.key): f.label for f in down}
        assert up_cells.keys() == down_cells.keys()
        for cell in up_cells:
            assert up_cells[cell] != down_cells[cell]


class TestSeedPrecedence:
    def test_crowd_outranks_classifier(self):
        g = make_graph(["a@T"], [])
        seeds = [
            fact("e", "a@T", True, SOURCE_CLASSIFIER),
            fact("e", "a@T", False, SOURCE_CROWD),
        ]
        facts, report = infer(seeds, g)
        assert len(facts) == 1 and facts[0].label is False
        assert report.conflict_count == 0

    def test_same_rank_conflict_suppresses_both(self):
        g = make_graph(["a@T"], [])
        seeds = [
            fact("e", "a@T", True, SOURCE_CROWD),
            fact("e", "a@T", False, SOURCE_CROWD),
        ]
        facts, report = infer(seeds, g)
        assert facts == []
        assert report.conflict_count == 1


class TestFixpoint:
    def test_chain_propagates(self):
        g = graph_with_polarity(
            ["a@T", "b@T", "c@T"],
            [
                ("a@T", "b@T", POSITIVE, {"e"}),
                ("b@T", "c@T", POSITIVE, {"e"}),
            ],
        )
        facts, report = infer_fixpoint([fact("e", "a@T", True)], g)
        labels = {f.st_pair.key: f.label for f in facts}
        assert labels == {"a@T": True, "b@T": True, "c@T": True}
        assert report.inferred_count == 2

    def test_negative_two_cycle_is_consistent(self):
        g = graph_with_polarity(
            ["a@T", "b@T"],
            [("a@T", "b@T", NEGATIVE, {"e"})],
        )
        facts, report = infer_fixpoint([fact("e", "a@T", True)], g)
        labels = {f.st_pair.key: f.label for f in facts}
        assert labels == {"a@T": True, "b@T": False}
        assert report.conflict_count == 0

    def test_no_edges_identity(self):
        g = make_graph(["a@T", "b@T"], [])
        seeds = [fact("x", "a@T", True)]
        facts, _ = infer_fixpoint(seeds, g)
        assert facts == seeds

    def test_idempotent_at_fixpoint(self):
        g = graph_with_polarity(
            ["a@T", "b@T", "c@T"],
            [
                ("a@T", "b@T", POSITIVE, {"e"}),
                ("b@T", "c@T", NEGATIVE, {"e"}),
            ],
        )
        first, _ = infer_fixpoint([fact("e", "a@T", True)], g)
        second, report = infer_fixpoint(first, g)
        assert {(f.entity, f.st_pair.key, f.label) for f in second} == {
            (f.entity, f.st_pair.key, f.label) for f in first
        }
        assert report.inferred_count == 0


class TestRuleOracle:
    @staticmethod
    def brute_force(seeds, graph):
        """Direct quantifier reading of the one-hop rule, no indexes."""
        derived = set()
        for seed in seeds:
            for edge in graph.edges:
                if seed.st_pair not in (edge.a, edge.b):
                    continue
                if seed.entity not in edge.shared_entities:
                    continue
                target = edge.b if seed.st_pair == edge.a else edge.a
                label = seed.label if edge.polarity == POSITIVE else not seed.label
                derived.add((seed.entity, target.key, label))
        return derived

    def test_matches_on_random_instances(self):
        rng = random.Random(202)
        for trial in range(200):
            n = rng.randint(2, 8)
            keys = [f"p{i}@T{rng.randint(0, 2)}" for i in range(n)]
            keys = list(dict.fromkeys(keys))
            edges = []
            for i in range(len(keys)):
                for j in range(i + 1, len(keys)):
                    if rng.random() < 0.4:
                        pol = POSITIVE if rng.random() < 0.6 else NEGATIVE
                        shared = {f"e{k}" for k in range(rng.randint(1, 4))}
                        edges.append((keys[i], keys[j], pol, shared))
            g = graph_with_polarity(keys, edges)
            n_seeds = rng.randint(1, min(8, len(keys) * 3))
            seeds = []
            used_cells = set()
            for _ in range(n_seeds):
                e = f"e{rng.randint(0, 4)}"
                key = rng.choice(keys)
                if (e, key) in used_cells:
                    continue  # oracle below assumes consistent, deduped seeds
                used_cells.add((e, key))
                seeds.append(fact(e, key, rng.random() < 0.5))
            expected = self.brute_force(seeds, g)
            seed_cells = {(s.entity, s.st_pair.key): s.label for s in seeds}
            got_facts, report = infer(seeds, g)
            got = {
                (f.entity, f.st_pair.key, f.label)
                for f in got_facts
                if f.source == SOURCE_INFERENCE
            }
            # The engine withholds derivations that clash with a seed or each
            # other; mirror that filtering on the oracle side.
            surviving = set()
            for entity, key, label in expected:
                if (entity, key) in seed_cells:
                    continue  # duplicate or seed-conflict: never emitted as derived
                if (entity, key, not label) in expected:
                    continue  # derived-vs-derived conflict: both withheld
                surviving.add((entity, key, label))
            assert got == surviving, f"trial {trial}"


class TestEnrich:
    def test_zero_facts_byte_identical(self, tmp_path, presidents_kb):
        out = tmp_path / "enriched.tsv"
        enrich(presidents_kb, [], out)
        original = (tmp_path / "presidents.tsv").read_bytes()
        assert out.read_bytes() == original
        sidecar = tmp_path / "enriched.facts.jsonl"
        assert sidecar.exists() and sidecar.read_text() == ""

    def test_facts_appended_and_roundtrip(self, tmp_path, presidents_kb):
        out = tmp_path / "enriched.tsv"
        facts = [
            fact("Obama", "old@politician", False, SOURCE_INFERENCE),
            fact("Obama", "young@president", True, SOURCE_CROWD),
        ]
        enrich(presidents_kb, facts, out)
        text = out.read_text()
        assert "Obama\tsubj:old@politician\tfalse\tliteral" in text
        assert "Obama\tsubj:young@president\ttrue\tliteral" in text
        # round-trip: subjective predicates are ignored by objective indexes
        kb2 = load_kb(out)
        assert kb2.load_report.triple_count == presidents_kb.load_report.triple_count + 2
        assert kb2.classes == presidents_kb.classes
        sidecar = read_facts(tmp_path / "enriched.facts.jsonl")
        assert {f.st_pair.key for f in sidecar} == {"old@politician", "young@president"}

    def test_sidecar_scales(self, tmp_path):
        n = 120_000
        facts = [
            fact(f"e{i}", "big@City", i % 2 == 0, SOURCE_INFERENCE, confidence=0.9)
            for i in range(n)
        ]
        path = tmp_path / "facts.jsonl"
        write_facts(facts, path)
        assert sum(1 for _ in path.open()) == n
        assert len(read_facts(path)) == n


class TestGoldenExample:
    def test_full_derivation(
        self, inference_example_kb, inference_example_lexicon, inference_example_pairs
    ):
        graph = build_graph(
            inference_example_pairs, inference_example_kb, inference_example_lexicon
        )
        seeds = [
            fact("Barack_Obama", "young@President", True),
            fact("New_York", "big@City", True),
        ]
        facts, report = infer(seeds, graph)
        derived = {
            (f.entity, f.st_pair.key, f.label)
            for f in facts
            if f.source == SOURCE_INFERENCE
        }
        assert derived == {
            ("Barack_Obama", "old@Politician", False),
            ("New_York", "large@City", True),
        }
        assert report.seed_count == 2
        assert report.inferred_count == 2
        assert report.conflict_count == 0
