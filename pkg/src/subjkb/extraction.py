"""Copular-pattern extraction of (adjective, noun) pairs and mapping onto KB classes."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError
from .kb import KnowledgeBase
from .pairs import STPair, pair_sort_key

log = logging.getLogger(__name__)

TAGS = ("ADJ", "NOUN", "VERB", "DET", "ADV", "OTHER")
COPULAS = {"is", "are", "was", "were", "am", "be", "been", "being", "'s", "'re"}


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[tuple[str, str], ...]  # (surface, tag)

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must be non-empty")
        for surface, tag in self.tokens:
            if tag not in TAGS:
                raise ValueError(f"unknown tag {tag!r} on token {surface!r}")


@dataclass(frozen=True)
class RawPair:
    adjective: str
    noun: str
    frequency: int = 1

    def __post_init__(self):
        if self.frequency < 1:
            raise ValueError("frequency must be >= 1")
        if self.adjective == self.noun:
            raise ValueError("adjective and noun must differ")


def singularize(noun: str) -> str:
    """Rule-table singularization; no dictionary lookups."""
    if len(noun) > 3 and noun.endswith("ies"):
        return noun[:-3] + "y"
    for suffix in ("ses", "xes", "zes", "ches", "shes"):
        if len(noun) > len(suffix) and noun.endswith(suffix):
            return noun[:-2]
    if len(noun) > 1 and noun.endswith("s") and not noun.endswith("ss"):
        return noun[:-1]
    return noun


def _match_copular(tokens, i):
    """NOUN + copular VERB + DET? + ADV* + ADJ + NOUN starting at index i.

    Returns (adjective, noun, end_index) or None.
    """
    n = len(tokens)
    if i + 3 >= n or tokens[i][1] != "NOUN":
        return None
    surface, tag = tokens[i + 1]
    if tag != "VERB" or surface.lower() not in COPULAS:
        return None
    j = i + 2
    if j < n and tokens[j][1] == "DET":
        j += 1
    while j < n and tokens[j][1] == "ADV":
        j += 1
    if j + 1 < n and tokens[j][1] == "ADJ" and tokens[j + 1][1] == "NOUN":
        return tokens[j][0].lower(), tokens[j + 1][0].lower(), j + 2
    return None


def _match_superlative(tokens, i):
    """DET + "most" + ADJ + NOUN starting at index i; catches superlatives with no copula."""
    n = len(tokens)
    if i + 3 >= n:
        return None
    if (
        tokens[i][1] == "DET"
        and tokens[i + 1][0].lower() == "most"
        and tokens[i + 2][1] == "ADJ"
        and tokens[i + 3][1] == "NOUN"
    ):
        return tokens[i + 2][0].lower(), tokens[i + 3][0].lower(), i + 4
    return None


def extract_pairs(sentences) -> list[RawPair]:
    """Scan sentences left to right, trying the copular pattern first, then the
    superlative one; a match consumes its span so one mention yields one count.

    Output is merged by (adjective, noun) and ordered by descending frequency,
    then lexicographically.
    """
    counts: dict[tuple[str, str], int] = {}
    for sentence in sentences:
        tokens = sentence.tokens
        i = 0
        while i < len(tokens):
            hit = _match_copular(tokens, i) or _match_superlative(tokens, i)
            if hit is None:
                i += 1
                continue
            adjective, noun, end = hit
            noun = singularize(noun)
            if adjective != noun:
                counts[(adjective, noun)] = counts.get((adjective, noun), 0) + 1
            i = end
    pairs = [RawPair(adj, noun, freq) for (adj, noun), freq in counts.items()]
    pairs.sort(key=lambda p: (-p.frequency, p.adjective, p.noun))
    return pairs


def read_tagged_corpus(path: str | Path):
    """One sentence per line, space-separated ``surface/TAG`` tokens."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = []
            for tok in line.split(" "):
                surface, sep, tag = tok.rpartition("/")
                if not sep or tag not in TAGS:
                    raise ParseError(path, line_no, f"malformed token {tok!r}")
                tokens.append((surface, tag))
            yield TaggedSentence(tuple(tokens))


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, iterative two-row DP."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """Normalized edit similarity: 1 - distance/maxlen, in [0, 1]."""
    if not a and not b:
        return 1.0
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


def map_to_kb(pairs: list[RawPair], kb: KnowledgeBase, min_similarity: float = 0.8) -> list[STPair]:
    """Map each raw pair's noun to the most lexically similar KB class.

    Pairs whose best class similarity falls below the threshold are dropped
    (count logged); ties go to the lexicographically smallest class id.
    Same-class pairs merge with summed support.
    """
    classes = sorted(kb.classes)
    lowered = [(c, c.lower()) for c in classes]
    merged: dict[tuple[str, str], int] = {}
    dropped = 0
    for pair in pairs:
        best_class, best_sim = None, -1.0
        for class_id, class_lower in lowered:
            sim = similarity(pair.noun, class_lower)
            if sim > best_sim:
                best_class, best_sim = class_id, sim
        if best_class is None or best_sim < min_similarity:
            dropped += 1
            continue
        key = (pair.adjective, best_class)
        merged[key] = merged.get(key, 0) + pair.frequency
    if dropped:
        log.info("map_to_kb: dropped %d pairs below similarity %.2f", dropped, min_similarity)
    result = [STPair(prop, typ, support) for (prop, typ), support in merged.items()]
    result.sort(key=pair_sort_key)
    return result


def write_pairs(pairs: list[STPair], path: str | Path):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(f"{p.property}\t{p.type}\t{p.support}\n")


def read_pairs(path: str | Path) -> list[STPair]:
    path = Path(path)
    pairs = []
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ParseError(path, line_no, f"expected 3 columns, got {len(cols)}")
            pairs.append(STPair(cols[0], cols[1], int(cols[2])))
    return pairs
