"""Adjective lexicon: synonym groups plus antonym links between groups."""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError, StructuralError


class Lexicon:
    """Synonymy is an equivalence relation (union-find closure at load);
    antonymy is symmetric between whole groups and propagates across them."""

    def __init__(self):
        self._parent: dict[str, str] = {}
        self._antonyms: set[tuple[str, str]] = set()  # pairs of group roots, normalized order

    def _find(self, lemma: str) -> str:
        self._parent.setdefault(lemma, lemma)
        root = lemma
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[lemma] != root:
            self._parent[lemma], lemma = root, self._parent[lemma]
        return root

    def add_synonym(self, a: str, b: str):
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return
        # Keep the lexicographically smallest lemma as root so merges are order-independent.
        lo, hi = sorted((ra, rb))
        self._parent[hi] = lo
        self._antonyms = {
            tuple(sorted((lo if x == hi else x, lo if y == hi else y)))
            for x, y in self._antonyms
        }

    def add_antonym(self, a: str, b: str):
        ra, rb = self._find(a), self._find(b)
        self._antonyms.add(tuple(sorted((ra, rb))))

    def validate(self):
        for ra, rb in self._antonyms:
            if ra == rb:
                raise StructuralError(
                    f"lexicon contradiction: group of {ra!r} is antonymous with itself"
                )

    def relation(self, a: str, b: str) -> str:
        """"positive" for same/synonymous lemmas, "negative" for antonymous, else "none"."""
        if a == b:
            return "positive"
        if a not in self._parent or b not in self._parent:
            return "none"
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return "positive"
        if tuple(sorted((ra, rb))) in self._antonyms:
            return "negative"
        return "none"


def load_lexicon(path: str | Path) -> Lexicon:
    """TSV ``lemma1  lemma2  rel`` with rel in {syn, ant}; contradiction -> load error."""
    path = Path(path)
    lex = Lexicon()
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ParseError(path, line_no, f"expected 3 columns, got {len(cols)}")
            a, b, rel = (c.strip().lower() for c in cols)
            if rel == "syn":
                lex.add_synonym(a, b)
            elif rel == "ant":
                lex.add_antonym(a, b)
            else:
                raise ParseError(path, line_no, f"rel must be syn|ant, got {rel!r}")
    lex.validate()
    return lex
