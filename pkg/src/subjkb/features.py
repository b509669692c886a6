"""Feature extraction from KB properties: min-max normalized numerics,
categorical tokens, and the mixed distance shared by sampling and kNN."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .kb import KnowledgeBase, is_numeric_literal

log = logging.getLogger(__name__)

MISSING_DISTANCE = 1.0


@dataclass
class FeatureVector:
    entity: str
    numeric: dict[str, float] = field(default_factory=dict)
    categorical: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class FeatureSchema:
    predicates: tuple[str, ...]
    numeric_predicates: frozenset[str]

    def is_numeric(self, predicate: str) -> bool:
        return predicate in self.numeric_predicates


def featurize(
    kb: KnowledgeBase,
    type_id: str,
    retained: list[str],
    include_relations: bool = True,
) -> tuple[list[FeatureVector], FeatureSchema]:
    """One vector per instance of the type.

    A predicate is numeric when every observed first value parses as a number;
    numerics are min-max normalized over the whole population.  Multi-valued
    predicates contribute their first value in load order.  Retained predicates
    never observed on the type are dropped from the schema with a warning.
    """
    if not retained:
        raise ValueError("retained predicate list must be non-empty")
    instances = kb.instances_of(type_id, transitive=True)
    observed: dict[str, list[tuple[str, str]]] = {}
    for e in instances:
        for pred, values in kb.property_index.get(e, {}).items():
            observed.setdefault(pred, []).append((e, values[0]))

    schema_preds = []
    for pred in retained:
        if pred not in observed:
            log.warning("featurize: predicate %r never observed on %r; dropped", pred, type_id)
            continue
        schema_preds.append(pred)

    numeric_preds = set()
    ranges: dict[str, tuple[float, float]] = {}
    for pred in schema_preds:
        values = [v for _, v in observed[pred]]
        if values and all(is_numeric_literal(v) for v in values):
            nums = [float(v) for v in values]
            numeric_preds.add(pred)
            ranges[pred] = (min(nums), max(nums))

    if not include_relations:
        # Entity-valued predicates (relations) become categorical features keyed
        # by the target id; the flag lets callers exclude them entirely.
        entity_valued = {
            t.predicate
            for t in kb.triples
            if t.object_kind == "entity" and t.predicate in schema_preds
        }
        schema_preds = [p for p in schema_preds if p not in entity_valued]

    schema = FeatureSchema(tuple(schema_preds), frozenset(p for p in numeric_preds if p in schema_preds))
    vectors = []
    for e in instances:
        props = kb.property_index.get(e, {})
        vec = FeatureVector(entity=e)
        for pred in schema.predicates:
            values = props.get(pred)
            if not values:
                continue
            value = values[0]
            if schema.is_numeric(pred):
                lo, hi = ranges[pred]
                vec.numeric[pred] = 0.0 if hi == lo else (float(value) - lo) / (hi - lo)
            else:
                vec.categorical[pred] = value
        vectors.append(vec)
    return vectors, schema


def feature_distance(a: FeatureVector, b: FeatureVector, schema: FeatureSchema) -> float:
    """Mean per-predicate distance: |normalized diff| for numerics, 0/1 mismatch
    for categoricals, 1.0 whenever either side is missing."""
    if not schema.predicates:
        return 0.0
    total = 0.0
    for pred in schema.predicates:
        if schema.is_numeric(pred):
            va, vb = a.numeric.get(pred), b.numeric.get(pred)
            total += MISSING_DISTANCE if va is None or vb is None else abs(va - vb)
        else:
            va, vb = a.categorical.get(pred), b.categorical.get(pred)
            if va is None or vb is None:
                total += MISSING_DISTANCE
            else:
                total += 0.0 if va == vb else 1.0
    return total / len(schema.predicates)
