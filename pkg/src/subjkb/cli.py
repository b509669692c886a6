"""Command-line interface: one subcommand per pipeline stage plus ``run`` and
``report`` for the whole thing."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .crowd import (
    AggregationParams,
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
from .errors import SubjkbError
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
from .kb import load_kb
from .lexicon import load_lexicon
from .models import apply_model, cross_validate, doc_to_model, model_to_doc, read_models, train, write_models
from .pairs import parse_pair_key
from .pipeline import PipelineConfig, run_pipeline
from .resemble import build_graph, read_graph, write_graph
from .sampling import representative_sample
from .selection import format_report_table, run_algorithm, selection_report
from .service import serve_tasks


def _echo_or_write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable info-level logging.")
def main(verbose):
    """Subjective knowledge acquisition over a triple-store KB."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def extract(corpus, out):
    """Extract (adjective, noun) pairs from a tagged corpus."""
    pairs = extract_pairs(read_tagged_corpus(corpus))
    with open(out, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(f"{p.adjective}\t{p.noun}\t{p.frequency}\n")
    click.echo(f"extracted {len(pairs)} distinct pairs -> {out}", err=True)


@main.command("map")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--min-similarity", default=0.8, show_default=True)
@click.option("--out", required=True, type=click.Path())
def map_cmd(pairs_path, kb_path, min_similarity, out):
    """Map extracted pairs onto KB classes by edit similarity."""
    from .extraction import RawPair

    raw = []
    for line in Path(pairs_path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            adj, noun, freq = line.split("\t")
            raw.append(RawPair(adj, noun, int(freq)))
    kb = load_kb(kb_path)
    mapped = map_to_kb(raw, kb, min_similarity)
    write_pairs(mapped, out)
    click.echo(f"mapped {len(mapped)} pairs ({len(raw) - len(mapped)} dropped) -> {out}", err=True)


@main.command()
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def graph(pairs_path, kb_path, lexicon_path, out):
    """Build the resemble graph over mapped pairs."""
    g = build_graph(read_pairs(pairs_path), load_kb(kb_path), load_lexicon(lexicon_path))
    write_graph(g, out)
    click.echo(f"graph: {len(g.vertices)} vertices, {len(g.edges)} edges -> {out}", err=True)


@main.command()
@click.option("--algo", type=click.Choice(["random", "fgreedy", "bgreedy", "div-fgreedy", "exact"]), required=True)
@click.option("--k", required=True, type=int)
@click.option("--delta", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Write TSV here instead of stdout.")
def select(algo, k, delta, seed, graph_path, out):
    """Select k pairs and print the metrics table."""
    g = read_graph(graph_path)
    result = run_algorithm(algo, g, k, delta=delta, seed=seed)
    _echo_or_write(selection_report([(algo, result)]), out)
    if out:
        click.echo(format_report_table([(algo, result)]), err=True)
    for pair in result.chosen:
        click.echo(pair.key, err=True)


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--type", "type_id", required=True)
@click.option("--budget", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def sample(kb_path, type_id, budget, seed, out):
    """Representative-sample instances of a type."""
    picked = representative_sample(load_kb(kb_path), type_id, budget, seed)
    Path(out).write_text("".join(e + "\n" for e in picked), encoding="utf-8")
    click.echo(f"sampled {len(picked)} instances -> {out}", err=True)


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--pair", "pair_key", required=True, help="Pair key, e.g. big@City.")
@click.option("--sample", "sample_path", required=True, type=click.Path(exists=True))
@click.option("--workers", default=5, show_default=True)
@click.option("--out", required=True, type=click.Path())
def hits(kb_path, pair_key, sample_path, workers, out):
    """Chunk a sample into five-instance HITs."""
    kb = load_kb(kb_path)
    pair = parse_pair_key(pair_key)
    entities = [line.strip() for line in Path(sample_path).read_text(encoding="utf-8").splitlines() if line.strip()]
    hit_list = generate_hits(pair, entities, kb, assignments_required=workers)
    write_hits(hit_list, out)
    click.echo(f"{len(hit_list)} HITs -> {out}", err=True)


@main.command()
@click.option("--hits", "hits_path", required=True, type=click.Path(exists=True))
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def simulate(hits_path, scenario_path, kb_path, seed, out):
    """Answer HITs with simulated noisy workers."""
    hit_list = read_hits(hits_path)
    answers = simulate_workers(hit_list, load_scenario(scenario_path), load_kb(kb_path), seed)
    write_answers(answers, out)
    click.echo(f"{len(answers)} answers -> {out}", err=True)


@main.command()
@click.option("--hits", "hits_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--bind", default="127.0.0.1:8765", show_default=True)
@click.option("--timeout", default=None, type=float, help="Stop after this many seconds.")
def serve(hits_path, log_path, bind, timeout):
    """Serve HITs to human workers over HTTP until all are answered."""
    serve_tasks(read_hits(hits_path), log_path, bind=bind, timeout=timeout, announce=lambda m: click.echo(m, err=True))


@main.command("aggregate")
@click.option("--hits", "hits_path", required=True, type=click.Path(exists=True))
@click.option("--answers", "answers_path", required=True, type=click.Path(exists=True))
@click.option("--theta-a", default=0.1, show_default=True)
@click.option("--theta-p", default=0.3, show_default=True)
@click.option("--out", required=True, type=click.Path())
def aggregate_cmd(hits_path, answers_path, theta_a, theta_p, out):
    """Aggregate worker answers into opinions and retained properties."""
    params = AggregationParams(theta_A=exact_fraction(theta_a), theta_P=exact_fraction(theta_p))
    result = aggregate(read_hits(hits_path), read_answers(answers_path), params)
    doc = {
        key: {
            "instances": {
                e: {"agreement": str(agg.agreements[e]), "opinion": agg.opinions[e]}
                for e in sorted(agg.opinions)
            },
            "retained_properties": agg.retained,
        }
        for key, agg in sorted(result.items())
    }
    Path(out).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"aggregated {len(result)} pairs -> {out}", err=True)


@main.command("train")
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--aggregation", "agg_path", required=True, type=click.Path(exists=True))
@click.option("--kind", type=click.Choice(["decision_tree", "nearest_neighbors"]), default="decision_tree", show_default=True)
@click.option("--max-depth", default=5, show_default=True)
@click.option("--k-neighbors", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def train_cmd(kb_path, agg_path, kind, max_depth, k_neighbors, seed, out):
    """Train one classifier per pair on crowd labels."""
    kb = load_kb(kb_path)
    agg_doc = json.loads(Path(agg_path).read_text(encoding="utf-8"))
    docs = {}
    for key, body in sorted(agg_doc.items()):
        pair = parse_pair_key(key)
        retained = body["retained_properties"]
        vectors, schema = featurize(kb, pair.type, retained)
        labels = {e: rec["opinion"] == "yes" for e, rec in body["instances"].items()}
        model = train(vectors, labels, kind=kind, schema=schema, max_depth=max_depth, k_neighbors=k_neighbors)
        try:
            cv = cross_validate(
                vectors, labels, kind=kind, schema=schema, folds=5, seed=seed,
                max_depth=max_depth, k_neighbors=k_neighbors,
            )
        except ValueError:
            cv = None
        docs[key] = {"model": model_to_doc(model), "cv_accuracy": cv}
        click.echo(f"{key}: cv_accuracy={cv}", err=True)
    write_models(docs, out)


@main.command("apply")
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--aggregation", "agg_path", required=True, type=click.Path(exists=True))
@click.option("--models", "models_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def apply_cmd(kb_path, agg_path, models_path, out):
    """Label every instance: crowd opinions where asked, the model elsewhere."""
    from fractions import Fraction

    kb = load_kb(kb_path)
    agg_doc = json.loads(Path(agg_path).read_text(encoding="utf-8"))
    model_docs = read_models(models_path)
    facts = []
    for key, body in sorted(agg_doc.items()):
        pair = parse_pair_key(key)
        model = doc_to_model(model_docs[key]["model"])
        vectors, _ = featurize(kb, pair.type, body["retained_properties"])
        asked = set(body["instances"])
        for e in sorted(asked):
            rec = body["instances"][e]
            score = Fraction(rec["agreement"])
            facts.append(
                SubjectiveFact(
                    entity=e,
                    st_pair=pair,
                    label=rec["opinion"] == "yes",
                    source=SOURCE_CROWD,
                    confidence=float(max(score, 1 - score)),
                )
            )
        rest = [v for v in vectors if v.entity not in asked]
        for doc in apply_model(model, rest, pair):
            facts.append(
                SubjectiveFact(
                    entity=doc["entity"],
                    st_pair=pair,
                    label=doc["label"],
                    source=doc["source"],
                    confidence=doc["confidence"],
                )
            )
    write_facts(facts, out)
    click.echo(f"{len(facts)} seed facts -> {out}", err=True)


@main.command("infer")
@click.option("--facts", "facts_path", required=True, type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", required=True, type=click.Path(exists=True))
@click.option("--fixpoint", is_flag=True, help="Iterate the rule to saturation.")
@click.option("--out", required=True, type=click.Path())
def infer_cmd(facts_path, pairs_path, kb_path, lexicon_path, fixpoint, out):
    """Propagate facts along the resemble graph."""
    g = build_graph(read_pairs(pairs_path), load_kb(kb_path), load_lexicon(lexicon_path))
    runner = infer_fixpoint if fixpoint else infer
    facts, rep = runner(read_facts(facts_path), g)
    write_facts(facts, out)
    click.echo(
        f"{rep.seed_count} seeds -> {rep.inferred_count} derived, {rep.conflict_count} conflicts -> {out}",
        err=True,
    )


@main.command("enrich")
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--facts", "facts_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def enrich_cmd(kb_path, facts_path, out):
    """Append subjective facts to the KB file (plus a JSON-lines sidecar)."""
    enrich(load_kb(kb_path), read_facts(facts_path), out)
    click.echo(f"enriched KB -> {out}", err=True)


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--fresh", is_flag=True, help="Ignore existing artifacts instead of resuming.")
def run_cmd(config_path, out_dir, seed, fresh):
    """Run the full pipeline into a run directory with a manifest."""
    config = PipelineConfig.from_toml(config_path)
    if seed is not None:
        config.seed = seed
    run_pipeline(config, out_dir, resume=not fresh, announce=lambda m: click.echo(m, err=True))
    click.echo(f"run complete -> {out_dir}", err=True)


@main.command("report")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default=None, type=click.Path())
def report_cmd(run_dir, out_dir):
    """Render evaluation tables and figures for a completed run."""
    from .report import eval_report

    out = eval_report(run_dir, out_dir)
    click.echo((Path(out) / "report.txt").read_text(encoding="utf-8"), nl=False)
    click.echo(f"report -> {out}", err=True)


def cli_main():
    try:
        main(standalone_mode=True)
    except SubjkbError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    cli_main()
