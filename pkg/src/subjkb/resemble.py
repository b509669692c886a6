"""Resemble relationships between ST pairs and the weighted graph built from them.

Two pairs resemble each other on an entity when the entity instantiates both
types (transitive typing), the types coincide or sit on a subclassOf chain,
and the properties are lexically related.  Edge weight counts the entities
on which this holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import NotFoundError, ParseError
from .kb import KnowledgeBase
from .lexicon import Lexicon
from .pairs import STPair, parse_pair_key

POSITIVE = "positive"
NEGATIVE = "negative"
NONE = "none"


@dataclass(frozen=True)
class ResembleEdge:
    a: STPair
    b: STPair
    polarity: str  # POSITIVE | NEGATIVE
    shared_entities: frozenset[str]

    @property
    def weight(self) -> int:
        return len(self.shared_entities)

    def other(self, pair: STPair) -> STPair:
        return self.b if pair == self.a else self.a


@dataclass(frozen=True)
class STGraph:
    vertices: tuple[STPair, ...]
    edges: tuple[ResembleEdge, ...]

    def incident(self, pair: STPair) -> list[ResembleEdge]:
        return [e for e in self.edges if pair in (e.a, e.b)]

    def weight_degrees(self) -> dict[STPair, int]:
        degrees = {v: 0 for v in self.vertices}
        for e in self.edges:
            degrees[e.a] += e.weight
            degrees[e.b] += e.weight
        return degrees

    def induced_weight(self, chosen) -> int:
        chosen = set(chosen)
        return sum(e.weight for e in self.edges if e.a in chosen and e.b in chosen)

    def total_weight(self) -> int:
        return sum(e.weight for e in self.edges)


def resemble(
    a: STPair,
    b: STPair,
    entity: str,
    kb: KnowledgeBase,
    lex: Lexicon,
    direct_subclass_only: bool = False,
) -> str:
    """Classify the relationship of two distinct pairs on one entity:
    POSITIVE, NEGATIVE, or NONE."""
    if a == b:
        raise ValueError("pairs must be distinct")
    for typ in (a.type, b.type):
        if not kb.is_class(typ):
            raise NotFoundError(f"unknown class: {typ!r}")
    if not kb.knows(entity):
        raise NotFoundError(f"unknown entity: {entity!r}")
    relation = lex.relation(a.property, b.property)
    if relation == NONE:
        return NONE
    if not kb.subclass_related(a.type, b.type, direct_only=direct_subclass_only):
        return NONE
    members_a = set(kb.instances_of(a.type, transitive=True))
    if entity not in members_a:
        return NONE
    members_b = set(kb.instances_of(b.type, transitive=True))
    if entity not in members_b:
        return NONE
    return relation


def build_graph(
    pairs: list[STPair],
    kb: KnowledgeBase,
    lex: Lexicon,
    direct_subclass_only: bool = False,
) -> STGraph:
    """Index-accelerated construction: the lexical relation and type condition are
    checked once per pair of vertices, then shared entities come from one set
    intersection.  Matches the brute-force build by construction (see tests)."""
    vertices = tuple(sorted(set(pairs)))
    members: dict[str, set[str]] = {}
    for p in vertices:
        if p.type not in members:
            members[p.type] = set(kb.instances_of(p.type, transitive=True))
    edges = []
    for i, a in enumerate(vertices):
        for b in vertices[i + 1 :]:
            relation = lex.relation(a.property, b.property)
            if relation == NONE:
                continue
            if not kb.subclass_related(a.type, b.type, direct_only=direct_subclass_only):
                continue
            shared = members[a.type] & members[b.type]
            if shared:
                edges.append(ResembleEdge(a, b, relation, frozenset(shared)))
    return STGraph(vertices, tuple(edges))


def build_graph_bruteforce(
    pairs: list[STPair],
    kb: KnowledgeBase,
    lex: Lexicon,
    direct_subclass_only: bool = False,
) -> STGraph:
    """Definition-at-face-value build: evaluate resemble() for every vertex pair
    and every entity.  Quadratic in entities; verification oracle only."""
    vertices = tuple(sorted(set(pairs)))
    entities = sorted({e for cls in kb.classes for e in kb.instances_of(cls, transitive=True)})
    edges = []
    for i, a in enumerate(vertices):
        for b in vertices[i + 1 :]:
            shared = set()
            polarity = None
            for e in entities:
                rel = resemble(a, b, e, kb, lex, direct_subclass_only=direct_subclass_only)
                if rel != NONE:
                    shared.add(e)
                    polarity = rel
            if shared:
                edges.append(ResembleEdge(a, b, polarity, frozenset(shared)))
    return STGraph(vertices, tuple(edges))


def write_graph(graph: STGraph, path: str | Path):
    """Edge-list TSV; isolated vertices are preserved as comment lines so a
    reload sees the full vertex set."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for v in graph.vertices:
            fh.write(f"# vertex\t{v.key}\t{v.support}\n")
        for e in graph.edges:
            fh.write(f"{e.a.key}\t{e.b.key}\t{e.polarity}\t{e.weight}\n")


def read_graph(path: str | Path) -> STGraph:
    """Reload a dump.  Shared entity sets are not persisted; edges come back
    with synthetic placeholder members that preserve the weight only."""
    path = Path(path)
    vertices: dict[str, STPair] = {}
    edges = []
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                cols = line.split("\t")
                if len(cols) == 3 and cols[0] == "# vertex":
                    pair = parse_pair_key(cols[1])
                    vertices[pair.key] = STPair(pair.property, pair.type, int(cols[2]))
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ParseError(path, line_no, f"expected 4 columns, got {len(cols)}")
            a = vertices.setdefault(cols[0], parse_pair_key(cols[0]))
            b = vertices.setdefault(cols[1], parse_pair_key(cols[1]))
            if cols[2] not in (POSITIVE, NEGATIVE):
                raise ParseError(path, line_no, f"bad polarity {cols[2]!r}")
            weight = int(cols[3])
            placeholder = frozenset(f"_w{idx}" for idx in range(weight))
            edges.append(ResembleEdge(a, b, cols[2], placeholder))
    return STGraph(tuple(sorted(vertices.values())), tuple(edges))
