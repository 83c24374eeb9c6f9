"""Command-line front door.

Subcommands: run, ablate, kappa, synth, inspect. All randomness flows
from --seed; runtime failures exit 1 with a JSON error object on stderr,
usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import metrics
from .data import (
    EmbeddingSet,
    LabeledDataset,
    align,
    load_embeddings,
    load_labels,
    write_embeddings,
    write_labels,
)
from .errors import DataError, EnsembleKitError
from .network import TrainConfig
from .runner import DEFAULT_FRACTIONS, ExperimentConfig, ablate, emit, run
from .synth import SyntheticSpec, gen_synthetic


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x != ""]


def _csv_strs(text: str) -> list[str]:
    return [x for x in text.split(",") if x != ""]


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embeddings", required=True, help="comma-separated EMB paths; order defines fusion order")
    p.add_argument("--labels", required=True, help="labels TSV path")
    p.add_argument("--kg", help="comma-separated EMB paths: cnet,wiki")
    p.add_argument("--fractions", default=",".join(str(f) for f in DEFAULT_FRACTIONS))
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--reward-norm", choices=["shifted", "raw"], default="shifted")
    p.add_argument("--loss-sign", choices=["fixed", "verbatim"], default="fixed")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=2e-5)
    p.add_argument("--weight-decay", type=float, default=1e-6)
    p.add_argument("--pca-dim", type=int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true", help="echo the report as JSON on stdout")


def _load_dataset(args) -> tuple[LabeledDataset, list[str], str | None, str | None]:
    labels = load_labels(args.labels)
    ids = labels.sample_ids
    sources = [load_embeddings(p, sample_ids=ids) for p in _csv_strs(args.embeddings)]
    model_ids = [s.source_id for s in sources]
    kg_cnet = kg_wiki = None
    if args.kg:
        kg_paths = _csv_strs(args.kg)
        if len(kg_paths) != 2:
            raise DataError("--kg expects exactly two paths: cnet,wiki")
        kg_sets = [load_embeddings(p, sample_ids=ids) for p in kg_paths]
        kg_cnet, kg_wiki = kg_sets[0].source_id, kg_sets[1].source_id
        sources += kg_sets
    return align(sources, labels), model_ids, kg_cnet, kg_wiki


def _expand_methods(raw: str, model_ids: list[str]) -> list[str]:
    methods: list[str] = []
    for token in _csv_strs(raw):
        if token == "baseline":
            methods += [f"baseline:{s}" for s in model_ids]
        else:
            methods.append(token)
    return methods


def _build_config(args) -> ExperimentConfig:
    dataset, model_ids, kg_cnet, kg_wiki = _load_dataset(args)
    return ExperimentConfig(
        dataset=dataset,
        model_sources=model_ids,
        methods=_expand_methods(args.method, model_ids),
        kg_cnet=kg_cnet,
        kg_wiki=kg_wiki,
        fractions=tuple(_csv_floats(args.fractions)),
        seed=args.seed,
        train=TrainConfig(
            batch_size=args.batch_size,
            learning_rate=args.lr,
            weight_decay=args.weight_decay,
            epochs=args.epochs,
            seed=args.seed,
            loss_sign=args.loss_sign,
        ),
        pca_dim=args.pca_dim,
        reward_norm=args.reward_norm,
        jobs=args.jobs,
    )


def _print_report_table(report: dict) -> None:
    print(f"{'method':<16} {'fraction':>8} {'accuracy':>9} {'kappa':>7}")
    for r in report["results"]:
        print(f"{r['method']:<16} {r['fraction']:>8.2f} {r['accuracy']:>9.4f} {r['kappa']:>7.2f}")
    for m in report["means"]:
        print(f"{m['method']:<16} {'mean':>8} {m['accuracy']:>9.4f} {m['kappa']:>7.2f}")


def cmd_run(args) -> int:
    config = _build_config(args)
    report = run(config)
    emit(report, args.format, args.out)
    if args.json:
        print(json.dumps(report))
    else:
        _print_report_table(report)
    return 0


def cmd_ablate(args) -> int:
    config = _build_config(args)
    if args.param == "alpha":
        grid = _csv_floats(args.alpha_grid)
    else:
        grid = _csv_floats(args.beta_grid)
    report = ablate(config, args.param, grid)
    emit(report, args.format, args.out)
    if args.json:
        print(json.dumps(report))
    else:
        print(f"{'value':>6} {'accuracy':>9}")
        for p in report["points"]:
            print(f"{p['value']:>6.2f} {p['accuracy']:>9.4f}")
    return 0


def cmd_kappa(args) -> int:
    pred_table = load_labels(args.pred)
    gold_table = load_labels(args.gold)
    gold_pos = {sid: i for i, (sid, _) in enumerate(gold_table.entries)}
    if set(pred_table.sample_ids) != set(gold_pos):
        raise DataError("prediction and gold files must cover the same sample ids")
    pairs = sorted(pred_table.entries, key=lambda e: gold_pos[e[0]])
    pred = np.array([lab for _, lab in pairs])
    gold = gold_table.labels
    c = max(pred_table.num_classes, gold_table.num_classes)
    print(
        json.dumps(
            {
                "accuracy": metrics.accuracy(pred, gold),
                "kappa": metrics.cohen_kappa(pred, gold, c),
                "num_classes": c,
                "n": int(gold.size),
            }
        )
    )
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec.from_json(args.spec)
    dataset = gen_synthetic(spec, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_labels(dataset.labels, out / "labels.tsv")
    written = {"labels": str(out / "labels.tsv"), "sources": {}}
    for sid, emb in dataset.sources.items():
        path = out / f"{sid}.emb"
        write_embeddings(emb, path)
        written["sources"][sid] = str(path)
    if args.json:
        print(json.dumps(written))
    else:
        print(f"wrote {len(dataset.sources)} EMB files and labels.tsv to {out}")
    return 0


def cmd_inspect(args) -> int:
    emb = load_embeddings(args.path)
    info = {"n": emb.n, "dim": emb.dim, "dtype": "float32"}
    if args.stats:
        vec = emb.vectors.astype(np.float64)
        info["column_mean"] = [float(x) for x in vec.mean(axis=0)]
        info["column_std"] = [float(x) for x in vec.std(axis=0)]
        info["finite_count"] = int(np.isfinite(emb.vectors).sum())
    if args.json or not args.stats:
        print(json.dumps(info))
    else:
        print(f"n={info['n']} dim={info['dim']} dtype=float32")
        print(f"finite values: {info['finite_count']}/{info['n'] * info['dim']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ensemblekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train and evaluate methods across split fractions")
    p_run.add_argument("--method", required=True, help="comma list: baseline, baseline:<src>, she, se, de")
    _add_common_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_abl = sub.add_parser("ablate", help="sweep alpha or beta over a grid")
    p_abl.add_argument("--method", default="", help="ignored; ablation selects methods from --param")
    p_abl.add_argument("--param", choices=["alpha", "beta"], required=True)
    p_abl.add_argument("--alpha-grid", default=",".join(str(i / 10) for i in range(11)))
    p_abl.add_argument("--beta-grid", default=",".join(str(i / 10) for i in range(11)))
    _add_common_run_flags(p_abl)
    p_abl.set_defaults(func=cmd_ablate)

    p_kap = sub.add_parser("kappa", help="accuracy and Cohen's kappa between two label TSVs")
    p_kap.add_argument("pred")
    p_kap.add_argument("gold")
    p_kap.set_defaults(func=cmd_kappa)

    p_syn = sub.add_parser("synth", help="generate a synthetic dataset from a JSON spec")
    p_syn.add_argument("--spec", required=True)
    p_syn.add_argument("--out", required=True)
    p_syn.add_argument("--seed", type=int, default=None)
    p_syn.add_argument("--json", action="store_true")
    p_syn.set_defaults(func=cmd_synth)

    p_ins = sub.add_parser("inspect", help="print an EMB file's header and column stats")
    p_ins.add_argument("path")
    p_ins.add_argument("--stats", action="store_true")
    p_ins.add_argument("--json", action="store_true")
    p_ins.set_defaults(func=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    # Ablation config needs she/de machinery; pick methods from the param.
    if args.func is cmd_ablate:
        args.method = "she" if args.param == "alpha" else "de"
    try:
        return args.func(args)
    except (EnsembleKitError, ValueError, KeyError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
