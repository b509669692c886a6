"""Triple store: loading, indexes, closure, and failure modes."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subjkb.errors import NotFoundError, ParseError, StructuralError
from subjkb.kb import is_numeric_literal, load_kb

from conftest import build_kb


class TestLoading:
    def test_toy_political_kb(self, presidents_kb):
        kb = presidents_kb
        assert kb.load_report.triple_count == 8
        assert kb.classes == {"president", "politician", "lawyer"}
        assert "Obama" in kb.instances_of("president")
        # closure: presidents are politicians
        assert "Obama" in kb.instances_of("politician", transitive=True)
        assert "Obama" not in kb.instances_of("politician", transitive=False)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("", encoding="utf-8")
        kb = load_kb(path)
        assert kb.load_report.triple_count == 0
        assert kb.classes == set()

    def test_three_line_closure(self, tmp_path):
        path = tmp_path / "kb.tsv"
        path.write_text(
            "a\ttype\tC\tentity\nC\tsubclassOf\tD\tentity\na\tbirthDate\t1961-8-4\tliteral\n",
            encoding="utf-8",
        )
        kb = load_kb(path)
        assert kb.instances_of("C") == ["a"]
        assert kb.instances_of("D") == ["a"]

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("a\ttype\tC\tentity\nbroken line\n", encoding="utf-8")
        with pytest.raises(ParseError, match=":2:"):
            load_kb(path)

    def test_bad_kind_column(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("a\tp\tb\tthing\n", encoding="utf-8")
        with pytest.raises(ParseError, match="kind"):
            load_kb(path)

    def test_subclass_cycle_detected(self):
        with pytest.raises(StructuralError, match="cycle"):
            build_kb(
                [
                    ("A", "subclassOf", "B", "entity"),
                    ("B", "subclassOf", "C", "entity"),
                    ("C", "subclassOf", "A", "entity"),
                ]
            )

    def test_class_instance_clash(self):
        with pytest.raises(StructuralError, match="both class and instance"):
            build_kb(
                [
                    ("x", "type", "C", "entity"),
                    ("C", "type", "D", "entity"),
                ]
            )

    def test_dangling_references_warned_not_fatal(self):
        kb = build_kb(
            [
                ("a", "type", "C", "entity"),
                ("a", "knows", "ghost", "entity"),
            ]
        )
        assert kb.load_report.dangling == ["ghost"]

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "kb.tsv"
        path.write_text("# header\n\na\ttype\tC\tentity\n", encoding="utf-8")
        assert load_kb(path).load_report.triple_count == 1

    def test_idempotent_loads(self, tmp_path):
        path = tmp_path / "kb.tsv"
        path.write_text(
            "a\ttype\tC\tentity\nC\tsubclassOf\tD\tentity\na\tsize\t12\tliteral\n",
            encoding="utf-8",
        )
        assert load_kb(path).index_dump() == load_kb(path).index_dump()

    def test_subjective_predicates_stay_out_of_indexes(self):
        kb = build_kb(
            [
                ("a", "type", "C", "entity"),
                ("a", "subj:big@C", "true", "literal"),
            ]
        )
        assert kb.load_report.triple_count == 2
        assert kb.property_index.get("a", {}) == {}


class TestQueries:
    def test_instances_of_politician(self, inference_example_kb):
        got = inference_example_kb.instances_of("Politician", transitive=True)
        assert got == ["Barack_Obama", "Hillary_Clinton"]

    def test_instances_of_unknown_class(self, inference_example_kb):
        with pytest.raises(NotFoundError):
            inference_example_kb.instances_of("Starship")

    def test_empty_direct_instances(self):
        kb = build_kb([("P", "subclassOf", "Q", "entity")])
        assert kb.instances_of("P", transitive=False) == []

    def test_chain_closure(self):
        kb = build_kb(
            [
                ("a", "type", "C", "entity"),
                ("C", "subclassOf", "D", "entity"),
                ("D", "subclassOf", "E", "entity"),
            ]
        )
        assert kb.instances_of("E", transitive=True) == ["a"]

    def test_properties_of_type_coverage(self):
        rows = [("city%d" % i, "type", "City", "entity") for i in range(4)]
        rows += [("city%d" % i, "areaLand", str(100 + i), "literal") for i in range(4)]
        rows += [("city0", "foundingDate", "1788", "literal"), ("city1", "foundingDate", "1810", "literal")]
        kb = build_kb(rows)
        assert kb.properties_of_type("City") == [("areaLand", 1.0), ("foundingDate", 0.5)]

    def test_properties_of_type_empty(self):
        kb = build_kb([("P", "subclassOf", "Q", "entity")])
        assert kb.properties_of_type("P") == []

    def test_figure_style_city_properties_present(self):
        kb = build_kb(
            [
                ("nyc", "type", "City", "entity"),
                ("nyc", "Country", "USA", "entity"),
                ("nyc", "areaLand", "780", "literal"),
                ("nyc", "foundingDate", "1624", "literal"),
                ("USA", "type", "Country_", "entity"),
            ]
        )
        preds = [p for p, _ in kb.properties_of_type("City")]
        assert {"Country", "areaLand", "foundingDate"} <= set(preds)


def _brute_force_closure(direct, dag, cls):
    members = set(direct.get(cls, ()))
    for sub, supers in dag.items():
        # reachability: sub subclassOf* cls
        seen, stack = set(), list(supers)
        while stack:
            s = stack.pop()
            if s in seen:
                continue
            seen.add(s)
            stack.extend(dag.get(s, ()))
        if cls in seen:
            members |= set(direct.get(sub, ()))
    return members


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_closure_matches_bruteforce_reachability(data):
    """Random small KBs: instances_of(transitive) equals reachability over the DAG."""
    n_classes = data.draw(st.integers(2, 6))
    classes = [f"K{i}" for i in range(n_classes)]
    rows = []
    dag = {}
    # Edges only from lower to higher index keep the hierarchy acyclic.
    for i in range(n_classes):
        for j in range(i + 1, n_classes):
            if data.draw(st.booleans()):
                rows.append((classes[i], "subclassOf", classes[j], "entity"))
                dag.setdefault(classes[i], set()).add(classes[j])
    direct = {}
    n_entities = data.draw(st.integers(0, 8))
    for k in range(n_entities):
        cls = data.draw(st.sampled_from(classes))
        rows.append((f"e{k}", "type", cls, "entity"))
        direct.setdefault(cls, set()).add(f"e{k}")
    if not rows:
        rows = [(classes[0], "subclassOf", classes[1], "entity")]
        dag = {classes[0]: {classes[1]}}
    kb = build_kb(rows)
    for cls in kb.classes:
        assert set(kb.instances_of(cls, transitive=True)) == _brute_force_closure(direct, dag, cls)


def test_no_triple_loss(tmp_path):
    rng = random.Random(5)
    lines = []
    for i in range(50):
        lines.append(f"e{i}\ttype\tC{rng.randrange(3)}\tentity")
        lines.append(f"e{i}\tscore\t{rng.random():.3f}\tliteral")
    path = tmp_path / "kb.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert load_kb(path).load_report.triple_count == 100


@pytest.mark.parametrize(
    "value,expected",
    [
        ("12", True),
        ("-3.5", True),
        ("8.4e6", True),
        (".5", True),
        ("1961-8-4", False),
        ("nan", False),
        ("inf", False),
        ("twelve", False),
        ("1_000", False),
    ],
)
def test_numeric_literal_detection(value, expected):
    assert is_numeric_literal(value) is expected
