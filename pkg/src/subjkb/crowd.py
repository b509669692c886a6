"""HIT generation, answer aggregation, cost accounting, and simulated workers.

Agreement scores and thresholds are kept as exact fractions: the dominant
opinion rule is a >= comparison on a boundary (3 of 5 workers at a 0.1
margin must flip the opinion), and float arithmetic gets it wrong.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from .errors import ConfigurationError, InsufficientDataError
from .kb import KnowledgeBase
from .pairs import STPair, parse_pair_key

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

HIT_SIZE = 5
DEFAULT_ASSIGNMENTS = 5

YES = "yes"
NO = "no"


def exact_fraction(value) -> Fraction:
    """Thresholds arrive as floats from TOML; go through their shortest decimal
    repr so 0.1 means exactly 1/10."""
    if isinstance(value, Fraction):
        return value
    return Fraction(str(value))


@dataclass(frozen=True)
class HIT:
    id: str
    st_pair: STPair
    instances: tuple[str, ...]
    candidate_properties: tuple[str, ...]
    display_properties: dict = field(default_factory=dict, compare=False)
    assignments_required: int = DEFAULT_ASSIGNMENTS

    def __post_init__(self):
        if not 1 <= len(self.instances) <= HIT_SIZE:
            raise ValueError(f"a HIT holds 1..{HIT_SIZE} instances, got {len(self.instances)}")
        if len(set(self.instances)) != len(self.instances):
            raise ValueError("HIT instances must be distinct")
        if not self.candidate_properties:
            raise ValueError("candidate_properties must be non-empty")


@dataclass(frozen=True)
class WorkerAnswer:
    hit_id: str
    worker_id: str
    selected_instances: tuple[str, ...]
    selected_properties: tuple[str, ...]
    submitted_at: str | None = None


@dataclass(frozen=True)
class AggregationParams:
    theta_A: Fraction = Fraction(1, 10)
    theta_P: Fraction = Fraction(3, 10)
    workers_per_hit: int = DEFAULT_ASSIGNMENTS

    def __post_init__(self):
        object.__setattr__(self, "theta_A", exact_fraction(self.theta_A))
        object.__setattr__(self, "theta_P", exact_fraction(self.theta_P))
        if not 0 <= self.theta_A <= Fraction(1, 2):
            raise ValueError("theta_A must be in [0, 0.5]")
        if not 0 <= self.theta_P <= 1:
            raise ValueError("theta_P must be in [0, 1]")


@dataclass(frozen=True)
class CostModel:
    reward_per_assignment: Decimal = Decimal("0.02")
    platform_fee_per_assignment: Decimal = Decimal("0.01")

    def __post_init__(self):
        for amount in (self.reward_per_assignment, self.platform_fee_per_assignment):
            if amount < 0:
                raise ValueError("amounts must be non-negative")


def generate_hits(
    st_pair: STPair,
    sample: list[str],
    kb: KnowledgeBase,
    assignments_required: int = DEFAULT_ASSIGNMENTS,
) -> list[HIT]:
    """Chunk the ordered sample into groups of five; every HIT carries the
    type's observed properties as its checklist and the instances' objective
    values for display."""
    if not sample:
        raise ValueError("sample must be non-empty")
    members = set(kb.instances_of(st_pair.type, transitive=True))
    outside = [e for e in sample if e not in members]
    if outside:
        raise ValueError(f"entities outside {st_pair.type}: {outside[:3]}")
    candidates = tuple(pred for pred, _cov in kb.properties_of_type(st_pair.type))
    if not candidates:
        raise ValueError(f"type {st_pair.type!r} has no observed properties to list")
    hits = []
    for seq, start in enumerate(range(0, len(sample), HIT_SIZE)):
        chunk = tuple(sample[start : start + HIT_SIZE])
        display = {
            e: {p: kb.value_of(e, p) for p in candidates if kb.value_of(e, p) is not None}
            for e in chunk
        }
        hits.append(
            HIT(
                id=f"{st_pair.slug}/{seq:04d}",
                st_pair=st_pair,
                instances=chunk,
                candidate_properties=candidates,
                display_properties=display,
                assignments_required=assignments_required,
            )
        )
    return hits


def cost(hits: list[HIT], model: CostModel | None = None) -> Decimal:
    """Total spend: assignments x (reward + platform fee), exact decimal."""
    model = model or CostModel()
    per_assignment = model.reward_per_assignment + model.platform_fee_per_assignment
    total = sum((hit.assignments_required * per_assignment for hit in hits), Decimal("0.00"))
    return total.quantize(Decimal("0.01"))


def agreement(answers: list[WorkerAnswer], instance: str) -> Fraction:
    """Fraction of the given answers selecting the instance."""
    if not answers:
        raise InsufficientDataError(f"no answers cover instance {instance!r}")
    selected = sum(1 for a in answers if instance in a.selected_instances)
    return Fraction(selected, len(answers))


def dominant_opinion(agreement_score, params: AggregationParams) -> str:
    """yes iff the agreement clears 0.5 by at least the margin, else no."""
    score = exact_fraction(agreement_score)
    if not 0 <= score <= 1:
        raise ValueError("agreement must be in [0, 1]")
    return YES if score - Fraction(1, 2) >= params.theta_A else NO


def retained_properties(
    answers: list[WorkerAnswer],
    candidates: list[str],
    params: AggregationParams,
) -> list[str]:
    """Properties whose per-assignment selection fraction reaches theta_P,
    ordered by that fraction descending (ties lexicographic)."""
    if not answers:
        raise InsufficientDataError("no answers to aggregate properties from")
    scores = {
        prop: Fraction(sum(1 for a in answers if prop in a.selected_properties), len(answers))
        for prop in candidates
    }
    kept = [p for p in candidates if scores[p] >= params.theta_P]
    kept.sort(key=lambda p: (-scores[p], p))
    return kept


@dataclass(frozen=True)
class PairScenario:
    truth_predicate: str
    threshold: float
    relevant_properties: tuple[str, ...]
    noise: float
    above: bool = True  # False flips the comparison, for antonym-side pairs

    def __post_init__(self):
        if not 0 <= self.noise < 0.5:
            raise ValueError("noise must be in [0, 0.5)")

    def truth(self, entity: str, kb: KnowledgeBase) -> bool:
        value = kb.numeric_value_of(entity, self.truth_predicate)
        if value is None:
            return False
        return value > self.threshold if self.above else value < self.threshold


class ScenarioSpec:
    """Ground-truth oracle for simulated runs: one entry per ST pair."""

    def __init__(self, entries: dict[str, PairScenario]):
        self._entries = entries

    def for_pair(self, pair: STPair) -> PairScenario:
        entry = self._entries.get(pair.key)
        if entry is None:
            raise ConfigurationError(f"scenario has no entry for pair {pair.key!r}")
        return entry

    def has_pair(self, pair: STPair) -> bool:
        return pair.key in self._entries

    @property
    def pair_keys(self) -> list[str]:
        return sorted(self._entries)


def load_scenario(path: str | Path) -> ScenarioSpec:
    """TOML with one table per pair key, e.g. ["big@City"] with keys
    truth_predicate, threshold, relevant_properties, noise."""
    path = Path(path)
    with path.open("rb") as fh:
        data = tomllib.load(fh)
    entries = {}
    for key, body in data.items():
        if not isinstance(body, dict):
            continue
        parse_pair_key(key)  # validates the table name
        try:
            entries[key] = PairScenario(
                truth_predicate=body["truth_predicate"],
                threshold=float(body["threshold"]),
                relevant_properties=tuple(body.get("relevant_properties", ())),
                noise=float(body.get("noise", 0.0)),
                above=bool(body.get("above", True)),
            )
        except KeyError as missing:
            raise ConfigurationError(f"scenario {key}: missing key {missing}") from None
    if not entries:
        raise ConfigurationError(f"{path}: no pair tables found")
    return ScenarioSpec(entries)


def simulate_workers(
    hits: list[HIT],
    scenario: ScenarioSpec,
    kb: KnowledgeBase,
    seed: int,
) -> list[WorkerAnswer]:
    """Each HIT gets assignments_required synthetic workers; every instance's
    true label and every property's relevance flips independently with the
    scenario's noise probability.  Fully deterministic under the seed."""
    rng = random.Random(seed)
    answers = []
    for hit in hits:
        spec = scenario.for_pair(hit.st_pair)
        relevant = set(spec.relevant_properties)
        for w in range(hit.assignments_required):
            picked_instances = tuple(
                e
                for e in hit.instances
                if spec.truth(e, kb) != (rng.random() < spec.noise)
            )
            picked_properties = tuple(
                p
                for p in hit.candidate_properties
                if (p in relevant) != (rng.random() < spec.noise)
            )
            answers.append(
                WorkerAnswer(
                    hit_id=hit.id,
                    worker_id=f"sim-{w:03d}",
                    selected_instances=picked_instances,
                    selected_properties=picked_properties,
                    submitted_at=None,
                )
            )
    return answers


# -- aggregation over a whole answer log --------------------------------------


@dataclass
class PairAggregate:
    pair: STPair
    opinions: dict[str, str]            # instance -> yes|no
    agreements: dict[str, Fraction]     # instance -> raw agreement, kept for inspection
    retained: list[str]


def aggregate(
    hits: list[HIT],
    answers: list[WorkerAnswer],
    params: AggregationParams,
) -> dict[str, PairAggregate]:
    """Replay an answer log into per-pair opinions and retained properties.

    Pure function of the answer multiset: order of the log does not matter.
    """
    by_hit: dict[str, list[WorkerAnswer]] = {}
    for a in sorted(answers, key=lambda a: (a.hit_id, a.worker_id)):
        by_hit.setdefault(a.hit_id, []).append(a)
    result: dict[str, PairAggregate] = {}
    pairs: dict[str, list[HIT]] = {}
    for hit in hits:
        pairs.setdefault(hit.st_pair.key, []).append(hit)
    for key in sorted(pairs):
        pair_hits = pairs[key]
        pair_answers = [a for hit in pair_hits for a in by_hit.get(hit.id, ())]
        opinions: dict[str, str] = {}
        agreements: dict[str, Fraction] = {}
        for hit in pair_hits:
            hit_answers = by_hit.get(hit.id, ())
            if not hit_answers:
                continue
            for instance in hit.instances:
                score = agreement(list(hit_answers), instance)
                agreements[instance] = score
                opinions[instance] = dominant_opinion(score, params)
        retained = (
            retained_properties(pair_answers, list(pair_hits[0].candidate_properties), params)
            if pair_answers
            else []
        )
        result[key] = PairAggregate(
            pair=pair_hits[0].st_pair,
            opinions=opinions,
            agreements=agreements,
            retained=retained,
        )
    return result


# -- serialization -------------------------------------------------------------


def hit_to_doc(hit: HIT) -> dict:
    """The JSON document the task service hands to workers."""
    return {
        "id": hit.id,
        "property": hit.st_pair.property,
        "type": hit.st_pair.type,
        "instances": [
            {"id": e, "display_properties": hit.display_properties.get(e, {})}
            for e in hit.instances
        ],
        "candidate_properties": list(hit.candidate_properties),
        "assignments_required": hit.assignments_required,
    }


def doc_to_hit(doc: dict) -> HIT:
    return HIT(
        id=doc["id"],
        st_pair=STPair(doc["property"], doc["type"]),
        instances=tuple(i["id"] for i in doc["instances"]),
        candidate_properties=tuple(doc["candidate_properties"]),
        display_properties={i["id"]: i.get("display_properties", {}) for i in doc["instances"]},
        assignments_required=doc.get("assignments_required", DEFAULT_ASSIGNMENTS),
    )


def write_hits(hits: list[HIT], path: str | Path):
    Path(path).write_text(
        json.dumps([hit_to_doc(h) for h in hits], indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_hits(path: str | Path) -> list[HIT]:
    docs = json.loads(Path(path).read_text(encoding="utf-8"))
    return [doc_to_hit(d) for d in docs]


def answer_to_line(answer: WorkerAnswer) -> str:
    return json.dumps(
        {
            "hit_id": answer.hit_id,
            "worker_id": answer.worker_id,
            "selected_instances": list(answer.selected_instances),
            "selected_properties": list(answer.selected_properties),
            "submitted_at": answer.submitted_at,
        },
        sort_keys=True,
    )


def write_answers(answers: list[WorkerAnswer], path: str | Path):
    with Path(path).open("w", encoding="utf-8") as fh:
        for a in answers:
            fh.write(answer_to_line(a) + "\n")


def read_answers(path: str | Path) -> list[WorkerAnswer]:
    answers = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            answers.append(
                WorkerAnswer(
                    hit_id=doc["hit_id"],
                    worker_id=doc["worker_id"],
                    selected_instances=tuple(doc["selected_instances"]),
                    selected_properties=tuple(doc["selected_properties"]),
                    submitted_at=doc.get("submitted_at"),
                )
            )
    return answers
