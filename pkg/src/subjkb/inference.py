"""Propagate subjective facts along resemble edges and write the enriched KB.

A fact (e, ST1, l) and an edge ST1--ST2 whose shared entities include e
yield (e, ST2, l) on a positive edge and (e, ST2, not l) on a negative one.
Derivation is one hop from the premises by default; the fixpoint variant
re-feeds derived facts until nothing new appears.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .kb import KnowledgeBase, SUBJECTIVE_PREFIX
from .pairs import STPair
from .resemble import NEGATIVE, STGraph

log = logging.getLogger(__name__)

SOURCE_CROWD = "crowd"
SOURCE_CLASSIFIER = "classifier"
SOURCE_INFERENCE = "inference"

_RANK = {SOURCE_CROWD: 0, SOURCE_CLASSIFIER: 1, SOURCE_INFERENCE: 2}


@dataclass(frozen=True)
class SubjectiveFact:
    entity: str
    st_pair: STPair
    label: bool
    source: str
    confidence: float = 1.0
    provenance: str | None = None

    @property
    def fact_id(self) -> str:
        return f"{self.entity}|{self.st_pair.key}"

    @property
    def cell(self) -> tuple[str, STPair]:
        return (self.entity, self.st_pair)


@dataclass
class InferenceReport:
    seed_count: int = 0
    inferred_count: int = 0
    conflict_count: int = 0
    conflicts: list[tuple[str, str, list[str]]] = field(default_factory=list)


def _conflict_id(fact: SubjectiveFact) -> str:
    """Identifies a contradicting fact by cell, source, and premise, so the two
    sides of a conflict never collide."""
    suffix = f"<{fact.provenance}" if fact.provenance else ""
    return f"{fact.fact_id}#{fact.source}{suffix}"


def _resolve_seeds(seeds: list[SubjectiveFact]):
    """Collapse duplicate seeds per (entity, pair): higher-rank sources win,
    equal ranks with opposing labels conflict and suppress the cell."""
    cells: dict[tuple[str, STPair], SubjectiveFact] = {}
    conflicts: dict[tuple[str, STPair], list[str]] = {}
    for fact in seeds:
        cell = fact.cell
        if cell in conflicts:
            continue
        held = cells.get(cell)
        if held is None:
            cells[cell] = fact
            continue
        if held.label == fact.label:
            continue
        held_rank, new_rank = _RANK[held.source], _RANK[fact.source]
        if new_rank < held_rank:
            cells[cell] = fact
        elif new_rank == held_rank:
            conflicts[cell] = sorted({_conflict_id(held), _conflict_id(fact)})
            del cells[cell]
    return cells, conflicts


def infer(
    seeds: list[SubjectiveFact],
    graph: STGraph,
    max_rounds: int = 1,
) -> tuple[list[SubjectiveFact], InferenceReport]:
    """One-hop rule application (``max_rounds=1``); seeds pass through into the
    output.  Derived facts contradicting anything already held are withheld
    and reported; a conflicted (entity, pair) cell stays frozen.
    """
    vertices = set(graph.vertices)
    for fact in seeds:
        if fact.st_pair not in vertices:
            log.warning("seed pair %s is not a graph vertex; passes through untouched", fact.st_pair)

    edges_by_pair: dict[STPair, list] = {}
    for e in graph.edges:
        edges_by_pair.setdefault(e.a, []).append(e)
        edges_by_pair.setdefault(e.b, []).append(e)

    cells, conflicts = _resolve_seeds(seeds)
    derived_count = 0
    frontier = list(cells.values())
    rounds = 0
    while frontier and rounds < max_rounds:
        rounds += 1
        new_facts: list[SubjectiveFact] = []
        for fact in sorted(frontier, key=lambda f: (f.entity, f.st_pair.key)):
            for edge in edges_by_pair.get(fact.st_pair, ()):
                if fact.entity not in edge.shared_entities:
                    continue
                target = edge.other(fact.st_pair)
                label = (not fact.label) if edge.polarity == NEGATIVE else fact.label
                candidate = SubjectiveFact(
                    entity=fact.entity,
                    st_pair=target,
                    label=label,
                    source=SOURCE_INFERENCE,
                    confidence=fact.confidence,
                    provenance=fact.fact_id,
                )
                cell = candidate.cell
                if cell in conflicts:
                    continue
                held = cells.get(cell)
                if held is None:
                    cells[cell] = candidate
                    new_facts.append(candidate)
                    derived_count += 1
                elif held.label != candidate.label:
                    conflicts[cell] = sorted({_conflict_id(held), _conflict_id(candidate)})
                    if held.source == SOURCE_INFERENCE:
                        # Equal rank: both derivations are suppressed.
                        del cells[cell]
                        derived_count -= 1
                    # A contradicted seed outranks the derivation and survives;
                    # the cell is frozen against further inference either way.
                # same label: duplicate, nothing to do
        frontier = new_facts

    facts = sorted(cells.values(), key=lambda f: (f.entity, f.st_pair.key))
    report = InferenceReport(
        seed_count=len({f.cell for f in seeds}),
        inferred_count=derived_count,
        conflict_count=len(conflicts),
        conflicts=sorted(
            (entity, pair.key, ids) for (entity, pair), ids in conflicts.items()
        ),
    )
    return facts, report


def infer_fixpoint(
    seeds: list[SubjectiveFact],
    graph: STGraph,
) -> tuple[list[SubjectiveFact], InferenceReport]:
    """Apply the rule until saturation; terminates because the fact universe
    (entities x pairs x 2) is finite and conflicted cells freeze."""
    return infer(seeds, graph, max_rounds=len(graph.vertices) * 2 + len(seeds) + 1)


def enrich(
    kb: KnowledgeBase,
    facts: list[SubjectiveFact],
    out: str | Path,
    sidecar: str | Path | None = None,
) -> Path:
    """Copy the source KB verbatim and append one namespaced triple per fact,
    plus a JSON-lines sidecar carrying full metadata.

    The appended predicates are ``subj:property@Type`` so a reload through
    the normal loader ignores them in the objective indexes.
    """
    out = Path(out)
    if sidecar is None:
        sidecar = out.with_suffix("").with_suffix(".facts.jsonl") if out.suffix else Path(str(out) + ".facts.jsonl")
    if kb.source_path and Path(kb.source_path).exists():
        base = Path(kb.source_path).read_text(encoding="utf-8")
    else:
        base = "".join(
            f"{t.subject}\t{t.predicate}\t{t.object}\t{t.object_kind}\n" for t in kb.triples
        )
    lines = [base]
    if facts and base and not base.endswith("\n"):
        lines.append("\n")
    for fact in facts:
        label = "true" if fact.label else "false"
        lines.append(f"{fact.entity}\t{SUBJECTIVE_PREFIX}{fact.st_pair.key}\t{label}\tliteral\n")
    out.write_text("".join(lines), encoding="utf-8")
    write_facts(facts, sidecar)
    return out


# -- fact file IO ---------------------------------------------------------------


def fact_to_doc(fact: SubjectiveFact) -> dict:
    return {
        "entity": fact.entity,
        "property": fact.st_pair.property,
        "type": fact.st_pair.type,
        "label": fact.label,
        "source": fact.source,
        "confidence": fact.confidence,
        "provenance": fact.provenance,
    }


def doc_to_fact(doc: dict) -> SubjectiveFact:
    return SubjectiveFact(
        entity=doc["entity"],
        st_pair=STPair(doc["property"], doc["type"]),
        label=bool(doc["label"]),
        source=doc["source"],
        confidence=float(doc.get("confidence", 1.0)),
        provenance=doc.get("provenance"),
    )


def write_facts(facts: list[SubjectiveFact], path: str | Path):
    with Path(path).open("w", encoding="utf-8") as fh:
        for fact in facts:
            fh.write(json.dumps(fact_to_doc(fact), sort_keys=True) + "\n")


def read_facts(path: str | Path) -> list[SubjectiveFact]:
    facts = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                facts.append(doc_to_fact(json.loads(line)))
    return facts
