"""Binary classifiers over KB feature vectors: CART decision tree and
nearest neighbors, built from scratch so every tie-break is pinned down.

The tree splits numerics at midpoints between sorted distinct values and
categoricals value-vs-rest, greedily by Gini gain; equal gains resolve to
the lowest schema index, then the lowest threshold / smallest category.
Rows missing the split predicate follow the branch that took the majority
of the training rows at that node.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import SchemaMismatchError
from .features import FeatureSchema, FeatureVector, feature_distance
from .pairs import STPair

DEFAULT_MAX_DEPTH = 5
DEFAULT_K_NEIGHBORS = 5

DECISION_TREE = "decision_tree"
NEAREST_NEIGHBORS = "nearest_neighbors"
CONSTANT = "constant"


def _value(vec: FeatureVector, pred: str, numeric: bool):
    return vec.numeric.get(pred) if numeric else vec.categorical.get(pred)


def _gini(n_true: int, n_false: int) -> float:
    n = n_true + n_false
    if n == 0:
        return 0.0
    p = n_true / n
    return 2.0 * p * (1.0 - p)


@dataclass
class _Node:
    prediction: bool | None = None
    purity: float = 1.0
    predicate: str | None = None
    numeric: bool = False
    threshold: float | None = None   # numeric: go left when value <= threshold
    category: str | None = None      # categorical: go left when value == category
    missing_left: bool = True
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.prediction is not None


class _TreePayload:
    def __init__(self, root: _Node, depth_limit: int):
        self.root = root
        self.depth_limit = depth_limit


class _NeighborPayload:
    def __init__(self, vectors: list[FeatureVector], labels: dict[str, bool], k: int):
        self.vectors = vectors
        self.labels = labels
        self.k = k


@dataclass
class TrainedModel:
    kind: str
    feature_schema: FeatureSchema
    payload: object

    def predict(self, vec: FeatureVector) -> tuple[bool, float]:
        """Return (label, confidence); confidence is leaf purity, neighbor vote
        fraction, or 1.0 for the constant model."""
        if self.kind == CONSTANT:
            return self.payload, 1.0
        if self.kind == DECISION_TREE:
            node = self.payload.root
            while not node.is_leaf:
                value = _value(vec, node.predicate, node.numeric)
                if value is None:
                    go_left = node.missing_left
                elif node.numeric:
                    go_left = value <= node.threshold
                else:
                    go_left = value == node.category
                node = node.left if go_left else node.right
            return node.prediction, node.purity
        if self.kind == NEAREST_NEIGHBORS:
            payload: _NeighborPayload = self.payload
            ranked = sorted(
                payload.vectors,
                key=lambda t: (feature_distance(vec, t, self.feature_schema), t.entity),
            )
            votes = [payload.labels[t.entity] for t in ranked[: payload.k]]
            n_true = sum(votes)
            label = n_true * 2 > len(votes)
            frac = (n_true if label else len(votes) - n_true) / len(votes)
            return label, frac
        raise ValueError(f"unknown model kind {self.kind!r}")


def _best_split(rows: list[tuple[FeatureVector, bool]], schema: FeatureSchema):
    """Highest Gini gain over all candidate splits, with deterministic ties."""
    n_true = sum(1 for _, lab in rows if lab)
    parent = _gini(n_true, len(rows) - n_true)
    best = None  # (gain, schema_idx, threshold_or_category_rank, descriptor)
    for idx, pred in enumerate(schema.predicates):
        numeric = schema.is_numeric(pred)
        if numeric:
            values = sorted({v.numeric[pred] for v, _ in rows if pred in v.numeric})
            candidates = [(a + b) / 2.0 for a, b in zip(values, values[1:])]
            candidates = [("num", t) for t in candidates]
        else:
            values = sorted({v.categorical[pred] for v, _ in rows if pred in v.categorical})
            candidates = [("cat", c) for c in values]
        for kind, pivot in candidates:
            left, right = [], []
            missing = []
            for vec, lab in rows:
                value = _value(vec, pred, numeric)
                if value is None:
                    missing.append((vec, lab))
                elif (value <= pivot) if kind == "num" else (value == pivot):
                    left.append((vec, lab))
                else:
                    right.append((vec, lab))
            if not left or not right:
                continue
            missing_left = len(left) >= len(right)
            (left if missing_left else right).extend(missing)
            lt = sum(1 for _, lab in left if lab)
            rt = sum(1 for _, lab in right if lab)
            weighted = (
                len(left) * _gini(lt, len(left) - lt) + len(right) * _gini(rt, len(right) - rt)
            ) / len(rows)
            gain = parent - weighted
            key = (-gain, idx, pivot if kind == "num" else values.index(pivot))
            if gain > 1e-12 and (best is None or key < best[0]):
                best = (key, pred, numeric, pivot, missing_left, left, right)
    return best


def _grow(rows, schema: FeatureSchema, depth: int, max_depth: int) -> _Node:
    n_true = sum(1 for _, lab in rows if lab)
    n_false = len(rows) - n_true
    majority = n_true > n_false  # exact tie predicts False
    purity = max(n_true, n_false) / len(rows) if rows else 1.0
    if depth >= max_depth or n_true == 0 or n_false == 0:
        return _Node(prediction=majority, purity=purity)
    split = _best_split(rows, schema)
    if split is None:
        return _Node(prediction=majority, purity=purity)
    _, pred, numeric, pivot, missing_left, left, right = split
    return _Node(
        predicate=pred,
        numeric=numeric,
        threshold=pivot if numeric else None,
        category=None if numeric else pivot,
        missing_left=missing_left,
        left=_grow(left, schema, depth + 1, max_depth),
        right=_grow(right, schema, depth + 1, max_depth),
    )


def train(
    vectors: list[FeatureVector],
    labels: dict[str, bool],
    kind: str = DECISION_TREE,
    schema: FeatureSchema | None = None,
    max_depth: int = DEFAULT_MAX_DEPTH,
    k_neighbors: int = DEFAULT_K_NEIGHBORS,
) -> TrainedModel:
    """Fit a model on the labeled subset of the supplied vectors.

    Single-class labels collapse to a constant model.
    """
    if schema is None:
        raise ValueError("schema is required")
    if not labels:
        raise ValueError("labels must be non-empty")
    rows = [(v, labels[v.entity]) for v in vectors if v.entity in labels]
    if len(rows) < 2:
        raise ValueError("need labels for at least 2 entities")
    classes = {lab for _, lab in rows}
    if len(classes) == 1:
        only = classes.pop()
        return TrainedModel(kind=CONSTANT, feature_schema=schema, payload=only)
    if kind == DECISION_TREE:
        root = _grow(rows, schema, 0, max_depth)
        return TrainedModel(kind=kind, feature_schema=schema, payload=_TreePayload(root, max_depth))
    if kind == NEAREST_NEIGHBORS:
        if k_neighbors % 2 == 0:
            raise ValueError("k_neighbors must be odd")
        payload = _NeighborPayload([v for v, _ in rows], {v.entity: lab for v, lab in rows}, k_neighbors)
        return TrainedModel(kind=kind, feature_schema=schema, payload=payload)
    raise ValueError(f"unknown model kind {kind!r}")


def cross_validate(
    vectors: list[FeatureVector],
    labels: dict[str, bool],
    kind: str,
    schema: FeatureSchema,
    folds: int = 5,
    seed: int = 0,
    max_depth: int = DEFAULT_MAX_DEPTH,
    k_neighbors: int = DEFAULT_K_NEIGHBORS,
) -> float:
    """Stratified k-fold accuracy, deterministic under the seed.

    Falls back to unstratified folds when a class has fewer members than folds.
    """
    import logging

    if folds < 2:
        raise ValueError("folds must be >= 2")
    labeled = [v for v in sorted(vectors, key=lambda v: v.entity) if v.entity in labels]
    if len(labeled) < folds:
        raise ValueError("need at least as many labeled vectors as folds")
    rng = random.Random(seed)
    pos = [v for v in labeled if labels[v.entity]]
    neg = [v for v in labeled if not labels[v.entity]]
    buckets: list[list[FeatureVector]] = [[] for _ in range(folds)]
    if pos and neg and (len(pos) < folds or len(neg) < folds):
        logging.getLogger(__name__).warning(
            "cross_validate: a class has fewer than %d members; folds are unstratified", folds
        )
        pool = labeled[:]
        rng.shuffle(pool)
        for i, v in enumerate(pool):
            buckets[i % folds].append(v)
    else:
        for group in (pos, neg):
            group = group[:]
            rng.shuffle(group)
            for i, v in enumerate(group):
                buckets[i % folds].append(v)
    accuracies = []
    for i in range(folds):
        test = buckets[i]
        train_rows = [v for j, b in enumerate(buckets) if j != i for v in b]
        if not test or len(train_rows) < 2:
            continue
        model = train(
            train_rows, labels, kind=kind, schema=schema,
            max_depth=max_depth, k_neighbors=k_neighbors,
        )
        correct = sum(1 for v in test if model.predict(v)[0] == labels[v.entity])
        accuracies.append(correct / len(test))
    return sum(accuracies) / len(accuracies)


def apply_model(
    model: TrainedModel,
    vectors: list[FeatureVector],
    st_pair: STPair,
    schema: FeatureSchema | None = None,
):
    """One subjective fact per vector; import-free of the inference module to
    avoid a cycle, so facts are returned as plain dicts and upgraded by the
    caller."""
    if schema is not None and schema != model.feature_schema:
        raise SchemaMismatchError(
            f"vectors built with schema {schema.predicates} but model expects "
            f"{model.feature_schema.predicates}"
        )
    facts = []
    for vec in vectors:
        label, confidence = model.predict(vec)
        facts.append(
            {
                "entity": vec.entity,
                "property": st_pair.property,
                "type": st_pair.type,
                "label": bool(label),
                "source": "classifier",
                "confidence": confidence,
                "provenance": None,
            }
        )
    return facts


# -- persistence ---------------------------------------------------------------


def _node_to_doc(node: _Node):
    if node.is_leaf:
        return {"leaf": True, "prediction": node.prediction, "purity": node.purity}
    return {
        "leaf": False,
        "predicate": node.predicate,
        "numeric": node.numeric,
        "threshold": node.threshold,
        "category": node.category,
        "missing_left": node.missing_left,
        "left": _node_to_doc(node.left),
        "right": _node_to_doc(node.right),
    }


def _doc_to_node(doc) -> _Node:
    if doc["leaf"]:
        return _Node(prediction=doc["prediction"], purity=doc["purity"])
    return _Node(
        predicate=doc["predicate"],
        numeric=doc["numeric"],
        threshold=doc["threshold"],
        category=doc["category"],
        missing_left=doc["missing_left"],
        left=_doc_to_node(doc["left"]),
        right=_doc_to_node(doc["right"]),
    )


def model_to_doc(model: TrainedModel) -> dict:
    doc = {
        "kind": model.kind,
        "schema": list(model.feature_schema.predicates),
        "numeric_predicates": sorted(model.feature_schema.numeric_predicates),
    }
    if model.kind == CONSTANT:
        doc["prediction"] = model.payload
    elif model.kind == DECISION_TREE:
        doc["tree"] = _node_to_doc(model.payload.root)
        doc["max_depth"] = model.payload.depth_limit
    else:
        payload: _NeighborPayload = model.payload
        doc["k"] = payload.k
        doc["neighbors"] = [
            {
                "entity": v.entity,
                "numeric": v.numeric,
                "categorical": v.categorical,
                "label": payload.labels[v.entity],
            }
            for v in payload.vectors
        ]
    return doc


def doc_to_model(doc: dict) -> TrainedModel:
    schema = FeatureSchema(tuple(doc["schema"]), frozenset(doc["numeric_predicates"]))
    kind = doc["kind"]
    if kind == CONSTANT:
        return TrainedModel(kind=kind, feature_schema=schema, payload=doc["prediction"])
    if kind == DECISION_TREE:
        payload = _TreePayload(_doc_to_node(doc["tree"]), doc.get("max_depth", DEFAULT_MAX_DEPTH))
        return TrainedModel(kind=kind, feature_schema=schema, payload=payload)
    vectors = []
    labels = {}
    for row in doc["neighbors"]:
        vectors.append(
            FeatureVector(entity=row["entity"], numeric=dict(row["numeric"]), categorical=dict(row["categorical"]))
        )
        labels[row["entity"]] = row["label"]
    return TrainedModel(
        kind=kind,
        feature_schema=schema,
        payload=_NeighborPayload(vectors, labels, doc["k"]),
    )


def write_models(models: dict[str, dict], path: str | Path):
    """Per-pair model documents plus whatever metrics the caller attaches."""
    Path(path).write_text(json.dumps(models, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def read_models(path: str | Path) -> dict[str, dict]:
    return json.loads(Path(path).read_text(encoding="utf-8"))
