"""Evaluation report over a completed run directory: delimited tables, a
human-readable summary, and bar-chart figures rendered to files."""

from __future__ import annotations

import logging
from decimal import Decimal
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .crowd import load_scenario, read_hits
from .inference import SOURCE_INFERENCE, read_facts
from .models import read_models
from .pipeline import read_manifest

log = logging.getLogger(__name__)

MISSING = "(missing)"


def _load_selection_table(run_dir: Path):
    path = run_dir / "selection.tsv"
    if not path.exists():
        return None
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    header = lines[0].split("\t")
    return [dict(zip(header, line.split("\t"))) for line in lines[1:]]


def _fact_accuracy(facts, scenario, kb):
    """Fraction of facts whose label matches the scenario oracle, per pair."""
    per_pair: dict[str, list[bool]] = {}
    for fact in facts:
        if not scenario.has_pair(fact.st_pair):
            continue
        spec = scenario.for_pair(fact.st_pair)
        per_pair.setdefault(fact.st_pair.key, []).append(
            fact.label == spec.truth(fact.entity, kb)
        )
    return {key: sum(oks) / len(oks) for key, oks in per_pair.items() if oks}


def _bar_figure(path: Path, title: str, labels, series: dict[str, list[float]], ylabel: str):
    fig, ax = plt.subplots(figsize=(max(6, len(labels) * 1.2), 4))
    width = 0.8 / max(1, len(series))
    for i, (name, values) in enumerate(series.items()):
        xs = [j + i * width for j in range(len(labels))]
        ax.bar(xs, values, width=width, label=name)
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(labels))])
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def eval_report(run_dir: str | Path, out_dir: str | Path | None = None) -> Path:
    """Build the report; sections whose artifacts are absent are marked and
    skipped rather than failing the whole report."""
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir else run_dir / "report"
    out.mkdir(parents=True, exist_ok=True)
    figures = out / "figures"
    figures.mkdir(exist_ok=True)
    summary: list[str] = []

    manifest = read_manifest(run_dir) if (run_dir / "manifest.json").exists() else {}
    config = manifest.get("config", {})

    # -- selection ----------------------------------------------------------
    summary.append("== selection ==")
    selection = _load_selection_table(run_dir)
    if selection is None:
        summary.append(MISSING)
    else:
        (out / "selection.tsv").write_text(
            "algo\tk\tweight\ttypes\n"
            + "".join(f"{r['algo']}\t{r['k']}\t{r['weight']}\t{r['types']}\n" for r in selection),
            encoding="utf-8",
        )
        for row in selection:
            summary.append(
                f"{row['algo']:>12}: k={row['k']} induced_weight={row['weight']} types={row['types']}"
            )
        algos = [r["algo"] for r in selection]
        _bar_figure(
            figures / "selection_weight.png",
            "Induced edge weight by algorithm",
            algos,
            {"weight": [float(r["weight"]) for r in selection]},
            "induced weight",
        )
        _bar_figure(
            figures / "selection_types.png",
            "Distinct types by algorithm",
            algos,
            {"types": [float(r["types"]) for r in selection]},
            "types",
        )

    # -- shared inputs for the remaining sections ----------------------------
    hits = read_hits(run_dir / "hits.json") if (run_dir / "hits.json").exists() else None
    seed_facts = (
        read_facts(run_dir / "facts_seed.jsonl")
        if (run_dir / "facts_seed.jsonl").exists()
        else None
    )
    all_facts = (
        read_facts(run_dir / "facts_all.jsonl")
        if (run_dir / "facts_all.jsonl").exists()
        else None
    )
    scenario = None
    kb = None
    if config.get("mode") == "simulate" and config.get("scenario"):
        try:
            from .kb import load_kb

            scenario = load_scenario(config["scenario"])
            kb = load_kb(config["kb"])
        except Exception as err:  # report must stay partial, not fail
            log.warning("report: cannot reload scenario/kb (%s); accuracy-vs-truth skipped", err)
            scenario = kb = None

    # -- accuracy -------------------------------------------------------------
    summary.append("")
    summary.append("== accuracy ==")
    models = read_models(run_dir / "models.json") if (run_dir / "models.json").exists() else None
    if models is None:
        summary.append(MISSING)
    else:
        seed_acc = _fact_accuracy(seed_facts, scenario, kb) if (seed_facts and scenario) else {}
        inferred_acc = (
            _fact_accuracy([f for f in all_facts if f.source == SOURCE_INFERENCE], scenario, kb)
            if (all_facts and scenario)
            else {}
        )
        rows = []
        for key in sorted(models):
            cv = models[key].get("cv_accuracy")
            rows.append(
                {
                    "pair": key,
                    "cv_accuracy": "" if cv is None else f"{cv:.4f}",
                    "seed_vs_truth": f"{seed_acc[key]:.4f}" if key in seed_acc else "",
                    "inferred_vs_truth": f"{inferred_acc[key]:.4f}" if key in inferred_acc else "",
                }
            )
        for key in sorted(set(inferred_acc) - set(models)):
            rows.append(
                {
                    "pair": key,
                    "cv_accuracy": "",
                    "seed_vs_truth": "",
                    "inferred_vs_truth": f"{inferred_acc[key]:.4f}",
                }
            )
        (out / "accuracy.tsv").write_text(
            "pair\tcv_accuracy\tseed_vs_truth\tinferred_vs_truth\n"
            + "".join(
                f"{r['pair']}\t{r['cv_accuracy']}\t{r['seed_vs_truth']}\t{r['inferred_vs_truth']}\n"
                for r in rows
            ),
            encoding="utf-8",
        )
        for r in rows:
            summary.append(
                f"{r['pair']:>24}: cv={r['cv_accuracy'] or '-'} seed={r['seed_vs_truth'] or '-'} "
                f"inferred={r['inferred_vs_truth'] or '-'}"
            )
        plotted = [r for r in rows if r["cv_accuracy"]]
        if plotted:
            _bar_figure(
                figures / "accuracy.png",
                "Cross-validation accuracy by pair",
                [r["pair"] for r in plotted],
                {"cv accuracy": [float(r["cv_accuracy"]) for r in plotted]},
                "accuracy",
            )

    # -- inference counts -----------------------------------------------------
    summary.append("")
    summary.append("== inference ==")
    if seed_facts is None or all_facts is None:
        summary.append(MISSING)
    else:
        per_pair: dict[str, dict[str, int]] = {}
        for fact in seed_facts:
            entry = per_pair.setdefault(fact.st_pair.key, {"seed": 0, "inferred": 0})
            entry["seed"] += 1
        for fact in all_facts:
            if fact.source == SOURCE_INFERENCE:
                entry = per_pair.setdefault(fact.st_pair.key, {"seed": 0, "inferred": 0})
                entry["inferred"] += 1
        inferred_acc = (
            _fact_accuracy([f for f in all_facts if f.source == SOURCE_INFERENCE], scenario, kb)
            if scenario
            else {}
        )
        # Accuracy is only computable against simulated ground truth.
        (out / "inference.tsv").write_text(
            "pair\tseed_facts\tinferred_facts\taccuracy\n"
            + "".join(
                f"{key}\t{counts['seed']}\t{counts['inferred']}\t"
                + (f"{inferred_acc[key]:.4f}" if key in inferred_acc else "")
                + "\n"
                for key, counts in sorted(per_pair.items())
            ),
            encoding="utf-8",
        )
        for key, counts in sorted(per_pair.items()):
            acc = f" accuracy={inferred_acc[key]:.4f}" if key in inferred_acc else ""
            summary.append(
                f"{key:>24}: seed_facts={counts['seed']} inferred_facts={counts['inferred']}{acc}"
            )
        if per_pair:
            labels = sorted(per_pair)
            _bar_figure(
                figures / "facts.png",
                "Seed vs inferred facts by pair",
                labels,
                {
                    "seed": [per_pair[k]["seed"] for k in labels],
                    "inferred": [per_pair[k]["inferred"] for k in labels],
                },
                "facts",
            )

    # -- cost -------------------------------------------------------------------
    summary.append("")
    summary.append("== cost ==")
    if hits is None:
        summary.append(MISSING)
    else:
        reward = Decimal(str(config.get("reward", "0.02")))
        fee = Decimal(str(config.get("fee", "0.01")))
        per_pair_hits: dict[str, list] = {}
        for hit in hits:
            per_pair_hits.setdefault(hit.st_pair.key, []).append(hit)
        rows = []
        total = Decimal("0.00")
        for key, pair_hits in sorted(per_pair_hits.items()):
            assignments = sum(h.assignments_required for h in pair_hits)
            spend = (assignments * (reward + fee)).quantize(Decimal("0.01"))
            total += spend
            rows.append((key, len(pair_hits), assignments, spend))
        (out / "cost.tsv").write_text(
            "pair\thits\tassignments\tcost\n"
            + "".join(f"{k}\t{h}\t{a}\t{c}\n" for k, h, a, c in rows)
            + f"total\t{sum(r[1] for r in rows)}\t{sum(r[2] for r in rows)}\t{total}\n",
            encoding="utf-8",
        )
        for key, n_hits, assignments, spend in rows:
            summary.append(f"{key:>24}: hits={n_hits} assignments={assignments} cost=${spend}")
        summary.append(f"{'total':>24}: cost=${total}")

    (out / "report.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    return out
