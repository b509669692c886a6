"""Pick the k pairs with the most inference power: four heuristics and an
exhaustive oracle for desk-scale verification.

Vertex identity and every tie-break use the pair key, so all algorithms
except the seeded random one are pure functions of the graph.
"""

from __future__ import annotations

import heapq
import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .pairs import STPair
from .resemble import STGraph

EXACT_VERTEX_LIMIT = 20


@dataclass
class SelectionResult:
    chosen: list[STPair]
    induced_weight: int
    type_count: int
    elapsed: float
    shortfall: bool = field(default=False)  # fewer than k pairs were available


def _result(graph: STGraph, chosen: list[STPair], started: float, k: int) -> SelectionResult:
    return SelectionResult(
        chosen=chosen,
        induced_weight=graph.induced_weight(chosen),
        type_count=len({p.type for p in chosen}),
        elapsed=time.perf_counter() - started,
        shortfall=len(chosen) < k,
    )


def select_random(graph: STGraph, k: int, seed: int) -> SelectionResult:
    """Uniform sample of min(k, |V|) vertices, deterministic under the seed."""
    if k < 1:
        raise ValueError("k must be >= 1")
    started = time.perf_counter()
    rng = random.Random(seed)
    pool = sorted(graph.vertices)
    chosen = rng.sample(pool, min(k, len(pool)))
    return _result(graph, chosen, started, k)


def select_fgreedy(graph: STGraph, k: int) -> SelectionResult:
    """Top-k vertices by static weight-degree computed once on the full graph."""
    if k < 1:
        raise ValueError("k must be >= 1")
    started = time.perf_counter()
    degrees = graph.weight_degrees()
    ranked = sorted(graph.vertices, key=lambda v: (-degrees[v], v.key))
    return _result(graph, ranked[:k], started, k)


def select_div_fgreedy(graph: STGraph, k: int, delta: float) -> SelectionResult:
    """Static-degree greedy with a per-type cap of max(1, floor(delta*k)).

    Candidates are visited in descending degree order; one rejected for its
    type staying at the cap is skipped, not retried.  O(|V| log |V| + |W|).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < delta <= 1:
        raise ValueError("delta must be in (0, 1]")
    started = time.perf_counter()
    # Exact cap arithmetic: floor(0.3 * 10) must be 3, not a float artifact.
    cap = max(1, int(Fraction(str(delta)) * k))
    degrees = graph.weight_degrees()
    ranked = sorted(graph.vertices, key=lambda v: (-degrees[v], v.key))
    chosen: list[STPair] = []
    per_type: dict[str, int] = {}
    for v in ranked:
        if len(chosen) == k:
            break
        if per_type.get(v.type, 0) < cap:
            chosen.append(v)
            per_type[v.type] = per_type.get(v.type, 0) + 1
    return _result(graph, chosen, started, k)


def select_bgreedy(graph: STGraph, k: int) -> SelectionResult:
    """Adaptive peeling: repeatedly drop the vertex with the minimum
    weight-degree in the surviving subgraph until k remain."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(graph.vertices):
        raise ValueError(f"k={k} exceeds vertex count {len(graph.vertices)}")
    started = time.perf_counter()
    alive = set(graph.vertices)
    degrees = graph.weight_degrees()
    neighbors: dict[STPair, list] = {v: [] for v in graph.vertices}
    for e in graph.edges:
        neighbors[e.a].append((e.b, e.weight))
        neighbors[e.b].append((e.a, e.weight))
    heap = [(deg, v.key, v) for v, deg in degrees.items()]
    heapq.heapify(heap)
    while len(alive) > k:
        deg, _, v = heapq.heappop(heap)
        if v not in alive or deg != degrees[v]:
            continue  # stale entry
        alive.remove(v)
        for u, w in neighbors[v]:
            if u in alive:
                degrees[u] -= w
                heapq.heappush(heap, (degrees[u], u.key, u))
    chosen = sorted(alive)
    return _result(graph, chosen, started, k)


def select_exact(graph: STGraph, k: int) -> SelectionResult:
    """Enumerate every k-subset; refuses above EXACT_VERTEX_LIMIT vertices.

    Ties resolve to the lexicographically first subset in combination order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(graph.vertices) > EXACT_VERTEX_LIMIT:
        raise ValueError(
            f"exact selection refuses graphs with more than {EXACT_VERTEX_LIMIT} vertices"
        )
    started = time.perf_counter()
    pool = sorted(graph.vertices)
    best: tuple[STPair, ...] = ()
    best_weight = -1
    for subset in itertools.combinations(pool, min(k, len(pool))):
        w = graph.induced_weight(subset)
        if w > best_weight:
            best, best_weight = subset, w
    return _result(graph, list(best), started, k)


ALGORITHMS = {
    "random": select_random,
    "fgreedy": select_fgreedy,
    "bgreedy": select_bgreedy,
    "div-fgreedy": select_div_fgreedy,
    "exact": select_exact,
}


def run_algorithm(
    name: str, graph: STGraph, k: int, delta: float = 0.1, seed: int = 0
) -> SelectionResult:
    if name == "random":
        return select_random(graph, k, seed)
    if name == "div-fgreedy":
        return select_div_fgreedy(graph, k, delta)
    if name in ("fgreedy", "bgreedy", "exact"):
        return ALGORITHMS[name](graph, k)
    raise ValueError(f"unknown selection algorithm: {name!r}")


def selection_report(results: list[tuple[str, SelectionResult]], include_timing: bool = True) -> str:
    """TSV table of per-algorithm metrics.  Timing is omitted for artifacts
    that must be byte-reproducible."""
    header = ["algo", "k", "weight", "types"]
    if include_timing:
        header.append("ms")
    lines = ["\t".join(header)]
    for name, res in results:
        row = [name, str(len(res.chosen)), str(res.induced_weight), str(res.type_count)]
        if include_timing:
            row.append(f"{res.elapsed * 1000:.2f}")
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def format_report_table(results: list[tuple[str, SelectionResult]]) -> str:
    """Human-readable fixed-width rendering of the same metrics."""
    rows = [("algo", "k", "weight", "types", "ms")]
    for name, res in results:
        rows.append(
            (
                name,
                str(len(res.chosen)),
                str(res.induced_weight),
                str(res.type_count),
                f"{res.elapsed * 1000:.2f}",
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)
