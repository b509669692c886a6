"""Shared fixtures plus the acceptance-criteria summary table."""

import pytest

from subjkb.kb import KnowledgeBase, Triple
from subjkb.lexicon import Lexicon
from subjkb.pairs import STPair

PRESIDENTS_KB_TSV = """\
# toy political knowledge base
Obama\ttype\tpresident\tentity
George_W_Bush\ttype\tpresident\tentity
Michelle\ttype\tlawyer\tentity
president\tsubclassOf\tpolitician\tentity
Obama\tmarried\tMichelle\tentity
Obama\tbirthDate\t1961-8-4\tliteral
Obama\tfullName\tBarack Obama\tliteral
Michelle\tbirthDate\t1964-1-17\tliteral
"""


def build_kb(rows):
    return KnowledgeBase([Triple(*row) for row in rows])


@pytest.fixture
def presidents_kb(tmp_path):
    path = tmp_path / "presidents.tsv"
    path.write_text(PRESIDENTS_KB_TSV, encoding="utf-8")
    from subjkb.kb import load_kb

    return load_kb(path)


@pytest.fixture
def inference_example_kb():
    """Two politicians, one of them a president, and two cities."""
    return build_kb(
        [
            ("Hillary_Clinton", "type", "Politician", "entity"),
            ("Barack_Obama", "type", "Politician", "entity"),
            ("Barack_Obama", "type", "President", "entity"),
            ("New_York", "type", "City", "entity"),
            ("Los_Angeles", "type", "City", "entity"),
            ("President", "subclassOf", "Politician", "entity"),
            ("New_York", "population", "8400000", "literal"),
            ("Los_Angeles", "population", "3900000", "literal"),
            ("Barack_Obama", "birthDate", "1961-8-4", "literal"),
            ("Hillary_Clinton", "birthDate", "1947-10-26", "literal"),
        ]
    )


@pytest.fixture
def inference_example_lexicon():
    lex = Lexicon()
    lex.add_synonym("big", "large")
    lex.add_antonym("old", "young")
    lex.validate()
    return lex


@pytest.fixture
def inference_example_pairs():
    return [
        STPair("old", "Politician"),
        STPair("young", "President"),
        STPair("big", "City"),
        STPair("large", "City"),
    ]


CRITERIA = {
    "test_aggregation_truth_table": "aggregation truth table (32 vectors x 3 margins, exact)",
    "test_worked_example_golden": "worked-example graph weights and derived facts (exact)",
    "test_selection_vs_oracle": "selection vs exhaustive oracle (500 graphs)",
    "test_diversity_cap": "diversity cap and type-count ordering (100 graphs)",
    "test_cost_reproduction": "cost: 200 instances -> 40 HITs -> $6.00 (exact)",
    "test_end_to_end_simulated_scenario": "end-to-end simulated scenario (accuracy >= 0.85)",
    "test_inference_fidelity": "inference fidelity (inferred within 0.05 of seeds)",
    "test_inference_rule_oracle_equivalence": "rule-application oracle equivalence (200 instances, exact)",
    "test_run_determinism": "pipeline determinism (byte-identical manifests)",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, ()):
            if "test_acceptance" not in getattr(report, "nodeid", ""):
                continue
            name = report.nodeid.rsplit("::", 1)[-1]
            if name in CRITERIA:
                verdict = "PASS" if outcome == "passed" else "FAIL"
                lines.append(f"{verdict}  {CRITERIA[name]}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(lines, key=lambda l: l.startswith("PASS")):
            terminalreporter.write_line(line)
