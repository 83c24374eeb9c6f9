"""embextract: sentence and knowledge-graph embedding extraction to the
EMB/TSV formats consumed by the ensembling engine."""

from .datasets import binarize_score, make_sentiment_corpus, read_input_tsv
from .emb import write_emb, write_labels_tsv
from .encoders import make_encoder
from .extract import ExtractionJob, run_job
from .kg import VectorTable, build_hashed_table

__version__ = "0.1.0"

__all__ = [
    "ExtractionJob",
    "VectorTable",
    "binarize_score",
    "build_hashed_table",
    "make_encoder",
    "make_sentiment_corpus",
    "read_input_tsv",
    "run_job",
    "write_emb",
    "write_labels_tsv",
]
