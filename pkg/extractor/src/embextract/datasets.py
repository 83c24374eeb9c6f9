"""Input TSV parsing and the bundled demo sentiment corpus.

The input format is a headered TSV with columns ``id``, ``text``,
optional ``text2`` (sentence pairs), and either ``label`` (integer) or
``score`` (similarity score, binarized at the 2.5 midpoint).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCORE_THRESHOLD = 2.5


@dataclass
class InputRow:
    sample_id: str
    text: str
    text2: str | None
    label: int


def binarize_score(score: float) -> int:
    return 1 if score >= SCORE_THRESHOLD else 0


def read_input_tsv(path: str | Path) -> list[InputRow]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f, delimiter="\t")
        fields = reader.fieldnames or []
        if "id" not in fields or "text" not in fields:
            raise ValueError(f"{path}: need at least 'id' and 'text' columns")
        has_label = "label" in fields
        has_score = "score" in fields
        if not has_label and not has_score:
            raise ValueError(f"{path}: need a 'label' or 'score' column")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            try:
                if has_label:
                    label = int(rec["label"])
                else:
                    label = binarize_score(float(rec["score"]))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: unparseable label") from exc
            rows.append(InputRow(rec["id"], rec["text"], rec.get("text2") or None, label))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


_POSITIVE = [
    "wonderful", "excellent", "delightful", "superb", "brilliant", "charming",
    "moving", "gripping", "hilarious", "beautiful", "masterful", "inspired",
]
_NEGATIVE = [
    "terrible", "awful", "dreadful", "boring", "clumsy", "tedious",
    "flat", "forgettable", "messy", "painful", "lifeless", "hollow",
]
_SUBJECTS = ["the movie", "this film", "the plot", "the acting", "the script", "the pacing"]
_TAILS = [
    "from start to finish", "in every scene", "despite the budget",
    "according to most viewers", "by any measure", "all the way through",
]


def make_sentiment_corpus(n: int, seed: int = 0, flip: float = 0.0) -> list[InputRow]:
    """A lexicon-driven binary sentiment corpus: label 1 sentences use
    positive adjectives, label 0 negative ones, with shared filler.
    ``flip`` mislabels that fraction of rows to keep tasks non-trivial."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        label = int(rng.integers(0, 2))
        words = _POSITIVE if label == 1 else _NEGATIVE
        sent = (
            f"{_SUBJECTS[rng.integers(len(_SUBJECTS))]} was "
            f"{words[rng.integers(len(words))]} and "
            f"{words[rng.integers(len(words))]} "
            f"{_TAILS[rng.integers(len(_TAILS))]}"
        )
        if flip > 0.0 and rng.random() < flip:
            label = 1 - label
        rows.append(InputRow(f"s{i:05d}", sent, None, label))
    return rows


def write_input_tsv(rows: list[InputRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t")
        writer.writerow(["id", "text", "text2", "label"])
        for r in rows:
            writer.writerow([r.sample_id, r.text, r.text2 or "", r.label])


def corpus_vocabulary(rows: list[InputRow]) -> list[str]:
    from .text import tokenize

    seen: dict[str, None] = {}
    for r in rows:
        for tok in tokenize(r.text if r.text2 is None else r.text + " " + r.text2):
            seen.setdefault(tok)
    return sorted(seen)
