"""Command-line entry points: extract, make-table, demo-corpus."""

from __future__ import annotations

import argparse
import json
import sys

from .datasets import corpus_vocabulary, make_sentiment_corpus, read_input_tsv, write_input_tsv
from .extract import ExtractionJob, run_job
from .kg import build_hashed_table


def _pairs(text: str) -> dict[str, str]:
    out = {}
    for item in text.split(","):
        if not item:
            continue
        name, _, value = item.partition("=")
        out[name] = value or name
    return out


def cmd_extract(args) -> int:
    job = ExtractionJob(
        input_tsv=args.input,
        out_dir=args.out,
        encoders=_pairs(args.encoders),
        kg_tables=_pairs(args.kg) if args.kg else {},
    )
    provenance = run_job(job)
    print(json.dumps(provenance["files"]))
    return 0


def cmd_make_table(args) -> int:
    rows = read_input_tsv(args.vocab_from)
    build_hashed_table(corpus_vocabulary(rows), args.dim, args.name, args.out)
    print(json.dumps({"table": args.out, "dim": args.dim}))
    return 0


def cmd_demo_corpus(args) -> int:
    write_input_tsv(make_sentiment_corpus(args.n, args.seed, args.flip), args.out)
    print(json.dumps({"corpus": args.out, "n": args.n}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embextract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ext = sub.add_parser("extract", help="encode a TSV into EMB files plus labels and provenance")
    p_ext.add_argument("--input", required=True)
    p_ext.add_argument("--out", required=True)
    p_ext.add_argument(
        "--encoders", default="base,large",
        help="comma list of name=spec; bare names use the built-in hashed encoders",
    )
    p_ext.add_argument("--kg", help="comma list of name=vector-table-path")
    p_ext.set_defaults(func=cmd_extract)

    p_tab = sub.add_parser("make-table", help="build a deterministic stand-in KG vector table")
    p_tab.add_argument("--vocab-from", required=True, help="input TSV whose vocabulary to cover")
    p_tab.add_argument("--dim", type=int, required=True)
    p_tab.add_argument("--name", required=True, help="seed namespace for the hashed vectors")
    p_tab.add_argument("--out", required=True)
    p_tab.set_defaults(func=cmd_make_table)

    p_demo = sub.add_parser("demo-corpus", help="write the bundled sentiment corpus as a TSV")
    p_demo.add_argument("--n", type=int, default=500)
    p_demo.add_argument("--seed", type=int, default=0)
    p_demo.add_argument("--flip", type=float, default=0.0, help="label-noise fraction")
    p_demo.add_argument("--out", required=True)
    p_demo.set_defaults(func=cmd_demo_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
