"""Representative instance sampling via deterministic k-medoids.

Medoids initialize farthest-first from the lexicographically smallest entity,
every tie anywhere breaks to the smaller entity id, and the budget spreads
over clusters proportionally to their size with at least one pick per
non-empty cluster.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from .features import FeatureSchema, FeatureVector, feature_distance, featurize
from .kb import KnowledgeBase

log = logging.getLogger(__name__)

MAX_CLUSTERS = 20
MAX_ITER = 50


def _pairwise(vectors: list[FeatureVector], schema: FeatureSchema) -> list[list[float]]:
    n = len(vectors)
    dist = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = feature_distance(vectors[i], vectors[j], schema)
            dist[i][j] = dist[j][i] = d
    return dist


def _farthest_first(dist, n, c) -> list[int]:
    medoids = [0]  # vectors arrive sorted by entity id, so 0 is the smallest
    nearest = dist[0][:]
    while len(medoids) < c:
        best = max(range(n), key=lambda i: (nearest[i], -i))
        # max() keeps the first (lowest-index) argmax; combined with sorted
        # input that is the lexicographically smallest entity.
        if best in medoids:
            break
        medoids.append(best)
        for i in range(n):
            if dist[best][i] < nearest[i]:
                nearest[i] = dist[best][i]
    return medoids


def _assign(dist, n, medoids) -> list[int]:
    labels = []
    for i in range(n):
        labels.append(min(medoids, key=lambda m: (dist[i][m], m)))
    return labels


def _update_medoids(dist, labels, medoids) -> list[int]:
    new_medoids = []
    for m in medoids:
        cluster = [i for i, lab in enumerate(labels) if lab == m]
        if not cluster:
            new_medoids.append(m)
            continue
        new_medoids.append(min(cluster, key=lambda i: (sum(dist[i][j] for j in cluster), i)))
    return sorted(set(new_medoids))


def representative_sample(
    kb: KnowledgeBase,
    type_id: str,
    budget: int,
    seed: int = 0,
) -> list[str]:
    """Pick up to ``budget`` instances of the type that cover its clustering
    structure.  Fully deterministic; the seed is accepted for interface
    stability but the procedure has no random choices left.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    instances = kb.instances_of(type_id, transitive=True)
    if not instances:
        raise ValueError(f"type {type_id!r} has no instances")
    if budget >= len(instances):
        if budget > len(instances):
            log.warning(
                "sampling %r: budget %d exceeds population %d; returning everyone",
                type_id, budget, len(instances),
            )
        return list(instances)

    predicates = [pred for pred, _cov in kb.properties_of_type(type_id)]
    if not predicates:
        # No features to cluster on: take the lexicographic prefix.
        return list(instances[:budget])
    vectors, schema = featurize(kb, type_id, predicates)
    n = len(vectors)
    c = min(MAX_CLUSTERS, budget)
    dist = _pairwise(vectors, schema)

    medoids = _farthest_first(dist, n, c)
    labels = _assign(dist, n, medoids)
    for _ in range(MAX_ITER):
        new_medoids = _update_medoids(dist, labels, medoids)
        new_labels = _assign(dist, n, new_medoids)
        if new_medoids == medoids and new_labels == labels:
            break
        medoids, labels = new_medoids, new_labels

    clusters: dict[int, list[int]] = {m: [] for m in medoids}
    for i, lab in enumerate(labels):
        clusters[lab].append(i)
    occupied = [m for m in medoids if clusters[m]]

    # Proportional allocation with a floor of one per non-empty cluster;
    # exact fractions keep the quota comparisons reproducible.
    quotas = {m: Fraction(len(clusters[m]) * budget, n) for m in occupied}
    alloc = {m: max(1, int(quotas[m])) for m in occupied}
    while sum(alloc.values()) > budget:
        # Overshoot only comes from the floors; shrink the smallest clusters first.
        shrinkable = [m for m in occupied if alloc[m] > 1]
        if not shrinkable:
            break
        victim = min(shrinkable, key=lambda m: (len(clusters[m]), m))
        alloc[victim] -= 1
    while sum(alloc.values()) < budget:
        open_clusters = [m for m in occupied if alloc[m] < len(clusters[m])]
        if not open_clusters:
            break
        # Most under-served quota first, ties to the lower medoid index.
        grow = min(open_clusters, key=lambda m: (alloc[m] - quotas[m], m))
        alloc[grow] += 1

    sample = []
    for m in occupied:
        members = sorted(clusters[m], key=lambda i: (dist[i][m], vectors[i].entity))
        sample.extend(vectors[i].entity for i in members[: alloc[m]])
    return sorted(sample)[:budget]
