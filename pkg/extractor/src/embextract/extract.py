"""The extraction job: input TSV in, EMB files + labels TSV + provenance
sidecar out. Row order always matches the input file."""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path

from .datasets import InputRow, read_input_tsv
from .emb import write_emb, write_labels_tsv
from .encoders import make_encoder
from .kg import VectorTable
from .text import join_pair


@dataclass
class ExtractionJob:
    input_tsv: str
    out_dir: str
    encoders: dict[str, str] = field(
        default_factory=lambda: {"base": "base", "large": "large"}
    )
    kg_tables: dict[str, str] = field(default_factory=dict)  # name -> table path


def run_job(job: ExtractionJob) -> dict:
    rows = read_input_tsv(job.input_tsv)
    texts = [join_pair(r.text, r.text2) for r in rows]
    out = Path(job.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    provenance = {
        "input": str(job.input_tsv),
        "rows": len(rows),
        "extracted_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "encoders": {},
        "kg": {},
        "files": {},
    }

    write_labels_tsv([(r.sample_id, r.label) for r in rows], out / "labels.tsv")
    provenance["files"]["labels"] = "labels.tsv"

    for name, spec in job.encoders.items():
        encoder = make_encoder(spec)
        write_emb(encoder.encode(texts), out / f"{name}.emb")
        provenance["encoders"][name] = encoder.provenance()
        provenance["files"][name] = f"{name}.emb"

    for name, table_path in job.kg_tables.items():
        table = VectorTable.load(table_path)
        vectors, misses = table.pool(texts)
        write_emb(vectors, out / f"{name}.emb")
        provenance["kg"][name] = {
            "table": str(table_path),
            "table_sha256": table.sha256,
            "dim": table.dim,
            "zero_hit_sentences": misses,
        }
        provenance["files"][name] = f"{name}.emb"

    (out / "provenance.json").write_text(
        json.dumps(provenance, indent=2) + "\n", encoding="utf-8"
    )
    return provenance
