"""Triple-store knowledge base with type-hierarchy indexes.

The KB is loaded from a 4-column TSV (``subject  predicate  object  kind``)
and is immutable afterwards.  ``type`` and ``subclassOf`` are reserved,
case-sensitive predicate names that feed the class/instance indexes; any
predicate starting with ``subj:`` is a namespaced subjective fact and is
kept out of the objective indexes so enriched KB files round-trip.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NotFoundError, ParseError, StructuralError

log = logging.getLogger(__name__)

TYPE_PRED = "type"
SUBCLASS_PRED = "subclassOf"
SUBJECTIVE_PREFIX = "subj:"

_NUMERIC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def is_numeric_literal(value: str) -> bool:
    """A literal parsing as a finite decimal number; dates and everything else are categorical."""
    return bool(_NUMERIC_RE.match(value))


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str
    object_kind: str  # "entity" | "literal"

    def __post_init__(self):
        if not self.subject or not self.predicate:
            raise ValueError("subject and predicate must be non-empty")
        if self.object_kind not in ("entity", "literal"):
            raise ValueError(f"object_kind must be entity|literal, got {self.object_kind!r}")


@dataclass
class LoadReport:
    triple_count: int = 0
    class_count: int = 0
    dangling_count: int = 0
    dangling: list = field(default_factory=list)


class KnowledgeBase:
    """Indexed, immutable view over a list of triples.

    Safe for concurrent reads; all indexes are built once at construction.
    """

    def __init__(self, triples: list[Triple], source_path: str | None = None):
        self.triples = list(triples)
        self.source_path = source_path
        self.classes: set[str] = set()
        self.subclass_dag: dict[str, set[str]] = {}          # class -> direct superclasses
        self._direct_instances: dict[str, set[str]] = {}     # class -> asserted members
        self._closure_instances: dict[str, set[str]] = {}    # class -> members incl. subclasses
        self.property_index: dict[str, dict[str, list[str]]] = {}
        self._known_ids: set[str] = set()
        self.load_report = LoadReport()
        self._build_indexes()

    # -- construction -----------------------------------------------------

    def _build_indexes(self):
        typed_instances: set[str] = set()
        for t in self.triples:
            if t.predicate == TYPE_PRED:
                if t.object_kind != "entity":
                    raise StructuralError(f"object of 'type' must be an entity: {t.subject}")
                self.classes.add(t.object)
                typed_instances.add(t.subject)
                self._direct_instances.setdefault(t.object, set()).add(t.subject)
            elif t.predicate == SUBCLASS_PRED:
                if t.object_kind != "entity":
                    raise StructuralError(f"object of 'subclassOf' must be an entity: {t.subject}")
                # Both sides of a subclassOf assertion are classes.
                self.classes.add(t.object)
                self.classes.add(t.subject)
                self.subclass_dag.setdefault(t.subject, set()).add(t.object)
            elif t.predicate.startswith(SUBJECTIVE_PREFIX):
                continue  # namespaced subjective facts stay out of objective indexes
            else:
                self.property_index.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)

        clash = self.classes & typed_instances
        if clash:
            raise StructuralError(f"id used as both class and instance: {sorted(clash)[0]!r}")

        self._known_ids |= self.classes
        for t in self.triples:
            self._known_ids.add(t.subject)
            if t.object_kind == "entity":
                self._known_ids.add(t.object)

        self._check_acyclic()
        self._materialize_closure()
        self.load_report.triple_count = len(self.triples)
        self.load_report.class_count = len(self.classes)
        self._count_dangling()

    def _check_acyclic(self):
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {c: WHITE for c in self.classes}
        for start in sorted(self.classes):
            if color[start] != WHITE:
                continue
            stack = [(start, iter(sorted(self.subclass_dag.get(start, ()))))]
            color[start] = GRAY
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    if color.get(nxt, WHITE) == GRAY:
                        raise StructuralError(f"subclassOf cycle involving {nxt!r}")
                    if color.get(nxt, WHITE) == WHITE:
                        color[nxt] = GRAY
                        stack.append((nxt, iter(sorted(self.subclass_dag.get(nxt, ())))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = BLACK
                    stack.pop()

    def _materialize_closure(self):
        # Propagate each class's direct members to every superclass reachable
        # through the (acyclic) subclass DAG.
        for cls in self.classes:
            self._closure_instances[cls] = set(self._direct_instances.get(cls, ()))
        for cls in self.classes:
            members = self._direct_instances.get(cls)
            if not members:
                continue
            seen = set()
            stack = list(self.subclass_dag.get(cls, ()))
            while stack:
                sup = stack.pop()
                if sup in seen:
                    continue
                seen.add(sup)
                self._closure_instances[sup].update(members)
                stack.extend(self.subclass_dag.get(sup, ()))

    def _count_dangling(self):
        # An entity object is dangling when the KB knows nothing else about it:
        # never a subject, not a class, and referenced as an object only once.
        subjects = {t.subject for t in self.triples}
        object_refs: dict[str, int] = {}
        for t in self.triples:
            if t.object_kind == "entity":
                object_refs[t.object] = object_refs.get(t.object, 0) + 1
        dangling = sorted(
            o
            for o, n in object_refs.items()
            if n == 1 and o not in subjects and o not in self.classes
        )
        self.load_report.dangling = dangling
        self.load_report.dangling_count = len(dangling)
        if dangling:
            log.warning(
                "%d dangling entity reference(s), e.g. %r", len(dangling), dangling[0]
            )

    # -- queries ----------------------------------------------------------

    def is_class(self, class_id: str) -> bool:
        return class_id in self.classes

    def knows(self, entity_id: str) -> bool:
        """True when the id appears anywhere in the KB (subject, entity object, or class)."""
        return entity_id in self._known_ids

    def instances_of(self, class_id: str, transitive: bool = True) -> list[str]:
        """Members of a class, sorted; with ``transitive`` the subclass closure counts."""
        if class_id not in self.classes:
            raise NotFoundError(f"unknown class: {class_id!r}")
        index = self._closure_instances if transitive else self._direct_instances
        return sorted(index.get(class_id, ()))

    def superclasses(self, class_id: str) -> set[str]:
        """All classes reachable via subclassOf, excluding class_id itself."""
        seen: set[str] = set()
        stack = list(self.subclass_dag.get(class_id, ()))
        while stack:
            sup = stack.pop()
            if sup in seen:
                continue
            seen.add(sup)
            stack.extend(self.subclass_dag.get(sup, ()))
        return seen

    def subclass_related(self, a: str, b: str, direct_only: bool = False) -> bool:
        """True when a subclassOf* b or b subclassOf* a (reflexively: a == b counts)."""
        if a == b:
            return True
        if direct_only:
            return b in self.subclass_dag.get(a, ()) or a in self.subclass_dag.get(b, ())
        return b in self.superclasses(a) or a in self.superclasses(b)

    def properties_of_type(self, class_id: str) -> list[tuple[str, float]]:
        """Predicates observed on instances of the class with their coverage fraction.

        Sorted by coverage descending, ties lexicographic.
        """
        members = self.instances_of(class_id, transitive=True)
        if not members:
            return []
        counts: dict[str, int] = {}
        for e in members:
            for pred in self.property_index.get(e, {}):
                counts[pred] = counts.get(pred, 0) + 1
        n = len(members)
        return sorted(
            ((pred, c / n) for pred, c in counts.items()),
            key=lambda pc: (-pc[1], pc[0]),
        )

    def value_of(self, entity: str, predicate: str) -> str | None:
        """First asserted object for (entity, predicate), or None."""
        values = self.property_index.get(entity, {}).get(predicate)
        return values[0] if values else None

    def numeric_value_of(self, entity: str, predicate: str) -> float | None:
        value = self.value_of(entity, predicate)
        if value is not None and is_numeric_literal(value):
            return float(value)
        return None

    def index_dump(self) -> str:
        """Canonical JSON rendering of all indexes; equal loads produce equal dumps."""
        payload = {
            "classes": sorted(self.classes),
            "subclass_dag": {c: sorted(s) for c, s in sorted(self.subclass_dag.items())},
            "direct_instances": {c: sorted(s) for c, s in sorted(self._direct_instances.items())},
            "closure_instances": {c: sorted(s) for c, s in sorted(self._closure_instances.items())},
            "property_index": {
                e: {p: list(v) for p, v in sorted(preds.items())}
                for e, preds in sorted(self.property_index.items())
            },
        }
        return json.dumps(payload, sort_keys=True, indent=1)


def load_kb(path: str | Path) -> KnowledgeBase:
    """Parse a 4-column TSV triple file and build all indexes.

    Lines beginning ``#`` and blank lines are skipped; any other line with a
    column count other than 4 is a parse error naming the line number.
    """
    path = Path(path)
    triples: list[Triple] = []
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ParseError(path, line_no, f"expected 4 tab-separated columns, got {len(cols)}")
            subject, predicate, obj, kind = cols
            if kind not in ("entity", "literal"):
                raise ParseError(path, line_no, f"kind must be entity|literal, got {kind!r}")
            if not subject or not predicate:
                raise ParseError(path, line_no, "empty subject or predicate")
            triples.append(Triple(subject, predicate, obj, kind))
    return KnowledgeBase(triples, source_path=str(path))


def write_kb(triples: list[Triple], path: str | Path):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for t in triples:
            fh.write(f"{t.subject}\t{t.predicate}\t{t.object}\t{t.object_kind}\n")
