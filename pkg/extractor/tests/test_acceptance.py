"""Acceptance checks for the extractor: the outputs must flow through the
consumer's CLI unchanged, and the real-ish sentiment task must show the
ensemble matching or beating the single-source baselines."""

import json
import struct
import subprocess

import numpy as np
import pytest

from embextract.datasets import make_sentiment_corpus, write_input_tsv, corpus_vocabulary
from embextract.extract import ExtractionJob, run_job
from embextract.kg import VectorTable, build_hashed_table
from embextract.text import tokenize

_FAST = ["--epochs", "15", "--batch-size", "32", "--lr", "0.01"]


def _gate(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name} {detail}"


def _emb_dims(path):
    raw = path.read_bytes()
    _, _, _, _, n, dim = struct.unpack_from("<4sBBHQI", raw)
    return n, dim


def _run_consumer(argv):
    return subprocess.run(["ensemblekit"] + argv, capture_output=True, text=True)


def _extract(tmp_path, n, seed=0, flip=0.0):
    rows = make_sentiment_corpus(n, seed=seed, flip=flip)
    src = tmp_path / "corpus.tsv"
    write_input_tsv(rows, src)
    vocab = corpus_vocabulary(rows)
    cnet_table = tmp_path / "cnet_table.txt"
    wiki_table = tmp_path / "wiki_table.txt"
    build_hashed_table(vocab, 300, "cnet", cnet_table)
    build_hashed_table(vocab, 500, "wiki", wiki_table)
    out = tmp_path / "data"
    run_job(ExtractionJob(
        input_tsv=str(src), out_dir=str(out),
        kg_tables={"cnet": str(cnet_table), "wiki": str(wiki_table)},
    ))
    return rows, out, cnet_table


def test_cross_language_contract(tmp_path, capsys):
    rows, data, cnet_table = _extract(tmp_path, 50, seed=3)

    dims = {name: _emb_dims(data / f"{name}.emb") for name in ("base", "large", "cnet", "wiki")}
    ok = all(n == 50 for n, _ in dims.values())
    ok &= dims["base"][1] == 768 and dims["large"][1] == 1024
    ok &= dims["cnet"][1] == 300 and dims["wiki"][1] == 500

    # Token-average spot check against an independent recomputation
    # straight from the table file.
    table = VectorTable.load(cnet_table)
    raw = (data / "cnet.emb").read_bytes()
    cnet = np.frombuffer(raw[20:], dtype="<f4").reshape(50, 300)
    for i in (0, 11, 23, 37, 49):
        hits = [table.vectors[t] for t in tokenize(rows[i].text) if t in table.vectors]
        expected = np.mean(hits, axis=0)
        ok &= bool(np.abs(cnet[i] - expected).max() <= 1e-6)

    proc = _run_consumer(
        [
            "run", "--method", "baseline,she,se,de",
            "--embeddings", f"{data}/base.emb,{data}/large.emb",
            "--kg", f"{data}/cnet.emb,{data}/wiki.emb",
            "--labels", f"{data}/labels.tsv",
            "--fractions", "0.2",
            "--out", str(tmp_path / "r.json"), "--json",
        ]
        + _FAST
    )
    ok &= proc.returncode == 0
    ok &= "error" not in proc.stderr
    if proc.returncode == 0:
        report = json.loads(proc.stdout)
        ok &= {m["method"] for m in report["means"]} == {
            "baseline:base", "baseline:large", "she", "se", "de",
        }
    _gate("cross-language-contract", ok, f"consumer exit {proc.returncode}")


def test_directional_sentiment(tmp_path, capsys):
    _, data, _ = _extract(tmp_path, 500, seed=4, flip=0.1)
    proc = _run_consumer(
        [
            "run", "--method", "baseline,se",
            "--embeddings", f"{data}/base.emb,{data}/large.emb",
            "--labels", f"{data}/labels.tsv",
            "--out", str(tmp_path / "r.json"), "--json",
        ]
        + _FAST
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    means = {m["method"]: m for m in report["means"]}
    base_acc = np.mean([means["baseline:base"]["accuracy"], means["baseline:large"]["accuracy"]])
    base_kap = np.mean([means["baseline:base"]["kappa"], means["baseline:large"]["kappa"]])
    se = means["se"]
    ok = se["accuracy"] >= base_acc and se["kappa"] >= base_kap
    _gate("directional-sentiment", ok,
          f"se acc {se['accuracy']:.3f} vs baseline mean {base_acc:.3f}, "
          f"se kappa {se['kappa']:.3f} vs {base_kap:.3f}")
