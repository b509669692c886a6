"""End-to-end pipeline: every stage reads and writes flat artifacts inside a
run directory, so a run can resume from any completed stage and two runs with
the same seed produce byte-identical artifacts (and manifests).

Nothing time-dependent lands in the run directory; wall-clock metrics belong
to the standalone ``select`` command and the report, which live outside it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from .crowd import (
    AggregationParams,
    CostModel,
    ScenarioSpec,
    aggregate,
    exact_fraction,
    generate_hits,
    load_scenario,
    read_answers,
    read_hits,
    simulate_workers,
    write_answers,
    write_hits,
)
from .errors import ConfigurationError
from .extraction import extract_pairs, map_to_kb, read_pairs, read_tagged_corpus, write_pairs
from .features import featurize
from .inference import (
    SOURCE_CROWD,
    SubjectiveFact,
    enrich,
    infer,
    infer_fixpoint,
    read_facts,
    write_facts,
)
from .kb import KnowledgeBase, load_kb
from .lexicon import load_lexicon
from .models import apply_model, cross_validate, doc_to_model, model_to_doc, read_models, train, write_models
from .pairs import STPair
from .resemble import build_graph, write_graph
from .sampling import representative_sample
from .selection import run_algorithm, selection_report
from .service import serve_tasks

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

ARTIFACTS = {
    "extract": ["pairs_raw.tsv"],
    "map": ["pairs.tsv"],
    "graph": ["graph.tsv"],
    "select": ["selection.tsv", "selected_pairs.tsv"],
    "hits": ["hits.json"],
    "answers": ["answers.jsonl"],
    "aggregate": ["aggregation.json"],
    "train": ["models.json"],
    "apply": ["facts_seed.jsonl"],
    "infer": ["facts_all.jsonl"],
    "enrich": ["enriched_kb.tsv"],
}
STAGE_ORDER = list(ARTIFACTS)


@dataclass
class PipelineConfig:
    kb: Path
    corpus: Path
    lexicon: Path
    mode: str = "simulate"
    scenario: Path | None = None
    seed: int = 0
    algo: str = "div-fgreedy"
    k: int = 5
    delta: float = 0.1
    budget: int = 200
    min_similarity: float = 0.8
    theta_A: Fraction = Fraction(1, 10)
    theta_P: Fraction = Fraction(3, 10)
    workers_per_hit: int = 5
    reward: Decimal = Decimal("0.02")
    fee: Decimal = Decimal("0.01")
    bind_address: str = "127.0.0.1:8765"
    serve_timeout: float | None = None
    classifier: str = "decision_tree"
    max_depth: int = 5
    k_neighbors: int = 5
    include_relations: bool = True
    fixpoint: bool = False

    @classmethod
    def from_toml(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        with path.open("rb") as fh:
            data = tomllib.load(fh)
        base = path.parent

        def resolve(value):
            p = Path(value)
            return p if p.is_absolute() else base / p

        selection = data.get("selection", {})
        sampling = data.get("sampling", {})
        crowd = data.get("crowd", {})
        classifier = data.get("classifier", {})
        extraction = data.get("extraction", {})
        inference = data.get("inference", {})
        try:
            cfg = cls(
                kb=resolve(data["kb"]),
                corpus=resolve(data["corpus"]),
                lexicon=resolve(data["lexicon"]),
                mode=data.get("mode", "simulate"),
                scenario=resolve(data["scenario"]) if "scenario" in data else None,
                seed=int(data.get("seed", 0)),
                algo=selection.get("algo", "div-fgreedy"),
                k=int(selection.get("k", 5)),
                delta=float(selection.get("delta", 0.1)),
                budget=int(sampling.get("budget", 200)),
                min_similarity=float(extraction.get("min_similarity", 0.8)),
                theta_A=exact_fraction(crowd.get("theta_A", 0.1)),
                theta_P=exact_fraction(crowd.get("theta_P", 0.3)),
                workers_per_hit=int(crowd.get("workers_per_hit", 5)),
                reward=Decimal(str(crowd.get("reward", "0.02"))),
                fee=Decimal(str(crowd.get("fee", "0.01"))),
                bind_address=crowd.get("bind_address", "127.0.0.1:8765"),
                serve_timeout=crowd.get("serve_timeout"),
                classifier=classifier.get("kind", "decision_tree"),
                max_depth=int(classifier.get("max_depth", 5)),
                k_neighbors=int(classifier.get("k_neighbors", 5)),
                include_relations=bool(classifier.get("include_relations", True)),
                fixpoint=bool(inference.get("fixpoint", False)),
            )
        except KeyError as missing:
            raise ConfigurationError(f"{path}: missing required key {missing}") from None
        cfg.validate()
        return cfg

    def validate(self):
        for name in ("kb", "corpus", "lexicon"):
            p = getattr(self, name)
            if not Path(p).exists():
                raise ConfigurationError(f"{name} path does not exist: {p}")
        if self.mode not in ("simulate", "serve"):
            raise ConfigurationError(f"mode must be simulate|serve, got {self.mode!r}")
        if self.mode == "simulate":
            if self.scenario is None or not Path(self.scenario).exists():
                raise ConfigurationError("simulate mode requires an existing scenario path")
        if self.k < 1 or self.budget < 1:
            raise ConfigurationError("k and budget must be >= 1")
        if not 0 < self.delta <= 1:
            raise ConfigurationError("delta must be in (0, 1]")
        if self.algo not in ("random", "fgreedy", "bgreedy", "div-fgreedy", "exact"):
            raise ConfigurationError(f"unknown selection algorithm {self.algo!r}")
        if self.classifier not in ("decision_tree", "nearest_neighbors"):
            raise ConfigurationError(f"unknown classifier {self.classifier!r}")

    def aggregation_params(self) -> AggregationParams:
        return AggregationParams(
            theta_A=self.theta_A, theta_P=self.theta_P, workers_per_hit=self.workers_per_hit
        )

    def cost_model(self) -> CostModel:
        return CostModel(reward_per_assignment=self.reward, platform_fee_per_assignment=self.fee)

    def to_doc(self) -> dict:
        """JSON-safe echo of every setting; lands in the manifest so the report
        can reload inputs without the original config file."""
        doc = {}
        for name, value in vars(self).items():
            if isinstance(value, (Path, Decimal, Fraction)):
                doc[name] = str(value)
            else:
                doc[name] = value
        return doc


class PipelineRun:
    """Execution context: loads inputs once, then walks the stage list."""

    def __init__(self, config: PipelineConfig, out_dir: str | Path, announce=log.info):
        self.config = config
        self.out = Path(out_dir)
        self.announce = announce
        self.kb: KnowledgeBase = load_kb(config.kb)
        self.lexicon = load_lexicon(config.lexicon)
        self.scenario: ScenarioSpec | None = (
            load_scenario(config.scenario) if config.scenario else None
        )
        self.raw_pairs = None
        self.pairs: list[STPair] | None = None
        self.graph = None
        self.chosen: list[STPair] | None = None
        self.hits = None
        self.answers = None
        self.aggregates = None
        self.model_docs: dict | None = None
        self.seed_facts: list[SubjectiveFact] | None = None
        self.all_facts: list[SubjectiveFact] | None = None

    def path(self, name: str) -> Path:
        return self.out / name

    def _complete(self, stage: str) -> bool:
        return all(self.path(a).exists() for a in ARTIFACTS[stage])

    # -- stages ------------------------------------------------------------

    def stage_extract(self, resume: bool):
        path = self.path("pairs_raw.tsv")
        if resume and self._complete("extract"):
            self.raw_pairs = []
            from .extraction import RawPair

            for line in path.read_text(encoding="utf-8").splitlines():
                adj, noun, freq = line.split("\t")
                self.raw_pairs.append(RawPair(adj, noun, int(freq)))
            return
        self.raw_pairs = extract_pairs(read_tagged_corpus(self.config.corpus))
        with path.open("w", encoding="utf-8") as fh:
            for p in self.raw_pairs:
                fh.write(f"{p.adjective}\t{p.noun}\t{p.frequency}\n")

    def stage_map(self, resume: bool):
        path = self.path("pairs.tsv")
        if resume and self._complete("map"):
            self.pairs = read_pairs(path)
            return
        self.pairs = map_to_kb(self.raw_pairs, self.kb, self.config.min_similarity)
        if not self.pairs:
            raise ConfigurationError("no extracted pairs mapped onto KB classes")
        write_pairs(self.pairs, path)

    def stage_graph(self, resume: bool):
        # The in-memory graph is always rebuilt (the dump drops shared-entity
        # sets); the artifact write is skipped when it already exists.
        self.graph = build_graph(self.pairs, self.kb, self.lexicon)
        if not (resume and self._complete("graph")):
            write_graph(self.graph, self.path("graph.tsv"))

    def stage_select(self, resume: bool):
        if resume and self._complete("select"):
            self.chosen = read_pairs(self.path("selected_pairs.tsv"))
            return
        k = min(self.config.k, len(self.graph.vertices))
        rows = []
        for name in ("random", "fgreedy", "bgreedy", "div-fgreedy", "exact"):
            if name == "exact" and len(self.graph.vertices) > 20:
                continue
            rows.append(
                (name, run_algorithm(name, self.graph, k, delta=self.config.delta, seed=self.config.seed))
            )
        chosen_result = next(res for name, res in rows if name == self.config.algo)
        self.chosen = chosen_result.chosen
        self.path("selection.tsv").write_text(
            selection_report(rows, include_timing=False), encoding="utf-8"
        )
        write_pairs(self.chosen, self.path("selected_pairs.tsv"))

    def stage_hits(self, resume: bool):
        path = self.path("hits.json")
        if resume and self._complete("hits"):
            self.hits = read_hits(path)
            return
        all_hits = []
        for pair in self.chosen:
            sample = representative_sample(
                self.kb, pair.type, self.config.budget, seed=self.config.seed
            )
            all_hits.extend(
                generate_hits(pair, sample, self.kb, assignments_required=self.config.workers_per_hit)
            )
        self.hits = all_hits
        write_hits(all_hits, path)

    def stage_answers(self, resume: bool):
        path = self.path("answers.jsonl")
        if self.config.mode == "simulate":
            if resume and self._complete("answers"):
                self.answers = read_answers(path)
                return
            self.answers = simulate_workers(self.hits, self.scenario, self.kb, self.config.seed)
            write_answers(self.answers, path)
        else:
            # The service replays an existing log, so a partially-answered run
            # picks up where it left off and a complete one returns at once.
            serve_tasks(
                self.hits,
                path,
                bind=self.config.bind_address,
                timeout=self.config.serve_timeout,
                announce=self.announce,
            )
            self.answers = read_answers(path)

    def stage_aggregate(self, resume: bool):
        path = self.path("aggregation.json")
        params = self.config.aggregation_params()
        if resume and self._complete("aggregate"):
            self.aggregates = aggregate(self.hits, self.answers, params)
            return
        self.aggregates = aggregate(self.hits, self.answers, params)
        doc = {
            key: {
                "instances": {
                    e: {"agreement": str(agg.agreements[e]), "opinion": agg.opinions[e]}
                    for e in sorted(agg.opinions)
                },
                "retained_properties": agg.retained,
            }
            for key, agg in sorted(self.aggregates.items())
        }
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")

    def stage_train(self, resume: bool):
        path = self.path("models.json")
        if resume and self._complete("train"):
            self.model_docs = read_models(path)
            return
        docs = {}
        for key in sorted(self.aggregates):
            agg = self.aggregates[key]
            if not agg.retained:
                raise ConfigurationError(
                    f"pair {key}: no properties survived theta_P; cannot featurize"
                )
            vectors, schema = featurize(
                self.kb, agg.pair.type, agg.retained, include_relations=self.config.include_relations
            )
            labels = {e: opinion == "yes" for e, opinion in agg.opinions.items()}
            model = train(
                vectors,
                labels,
                kind=self.config.classifier,
                schema=schema,
                max_depth=self.config.max_depth,
                k_neighbors=self.config.k_neighbors,
            )
            try:
                cv = cross_validate(
                    vectors,
                    labels,
                    kind=self.config.classifier,
                    schema=schema,
                    folds=5,
                    seed=self.config.seed,
                    max_depth=self.config.max_depth,
                    k_neighbors=self.config.k_neighbors,
                )
            except ValueError:
                cv = None
            docs[key] = {"model": model_to_doc(model), "cv_accuracy": cv}
        self.model_docs = docs
        write_models(docs, path)

    def stage_apply(self, resume: bool):
        path = self.path("facts_seed.jsonl")
        if resume and self._complete("apply"):
            self.seed_facts = read_facts(path)
            return
        facts: list[SubjectiveFact] = []
        for key in sorted(self.aggregates):
            agg = self.aggregates[key]
            model = doc_to_model(self.model_docs[key]["model"])
            vectors, _ = featurize(
                self.kb,
                agg.pair.type,
                agg.retained,
                include_relations=self.config.include_relations,
            )
            asked = set(agg.opinions)
            for e in sorted(asked):
                score = agg.agreements[e]
                confidence = float(max(score, 1 - score))
                facts.append(
                    SubjectiveFact(
                        entity=e,
                        st_pair=agg.pair,
                        label=agg.opinions[e] == "yes",
                        source=SOURCE_CROWD,
                        confidence=confidence,
                    )
                )
            rest = [v for v in vectors if v.entity not in asked]
            for doc in apply_model(model, rest, agg.pair):
                facts.append(
                    SubjectiveFact(
                        entity=doc["entity"],
                        st_pair=agg.pair,
                        label=doc["label"],
                        source=doc["source"],
                        confidence=doc["confidence"],
                    )
                )
        self.seed_facts = facts
        write_facts(facts, path)

    def stage_infer(self, resume: bool):
        path = self.path("facts_all.jsonl")
        if resume and self._complete("infer"):
            self.all_facts = read_facts(path)
            return
        runner = infer_fixpoint if self.config.fixpoint else infer
        self.all_facts, report = runner(self.seed_facts, self.graph)
        self.announce(
            f"inference: {report.seed_count} seeds -> {report.inferred_count} derived, "
            f"{report.conflict_count} conflicts"
        )
        write_facts(self.all_facts, path)

    def stage_enrich(self, resume: bool):
        path = self.path("enriched_kb.tsv")
        if resume and self._complete("enrich"):
            return
        enrich(self.kb, self.all_facts, path, sidecar=self.path("facts_all.jsonl"))

    # -- driver ------------------------------------------------------------

    def run(self, resume: bool = True) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        stages = {
            "extract": self.stage_extract,
            "map": self.stage_map,
            "graph": self.stage_graph,
            "select": self.stage_select,
            "hits": self.stage_hits,
            "answers": self.stage_answers,
            "aggregate": self.stage_aggregate,
            "train": self.stage_train,
            "apply": self.stage_apply,
            "infer": self.stage_infer,
            "enrich": self.stage_enrich,
        }
        for name in STAGE_ORDER:
            try:
                skipped = resume and self._complete(name)
                stages[name](resume)
                self.announce(f"stage {name}: {'kept' if skipped else 'done'}")
            except Exception as err:
                raise RuntimeError(f"stage {name!r} failed: {err}") from err
        self.write_manifest()
        return self.out

    def write_manifest(self):
        entries = []
        for file in sorted(self.out.rglob("*")):
            if not file.is_file() or file.name == "manifest.json":
                continue
            digest = hashlib.sha256(file.read_bytes()).hexdigest()
            entries.append(
                {
                    "path": str(file.relative_to(self.out)),
                    "sha256": digest,
                    "bytes": file.stat().st_size,
                }
            )
        manifest = {
            "config": self.config.to_doc(),
            "stages": STAGE_ORDER,
            "artifacts": entries,
        }
        self.path("manifest.json").write_text(
            json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8"
        )


def run_pipeline(config: PipelineConfig, out_dir: str | Path, resume: bool = True, announce=log.info) -> Path:
    return PipelineRun(config, out_dir, announce=announce).run(resume=resume)


def read_manifest(run_dir: str | Path) -> dict:
    return json.loads((Path(run_dir) / "manifest.json").read_text(encoding="utf-8"))
