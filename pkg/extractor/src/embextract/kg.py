"""Knowledge-graph sentence vectors.

A vector table is a word2vec-style text file: a ``count dim`` header line
followed by one ``token v1 ... vd`` line per entry. A sentence's vector
is the average of its in-vocabulary token vectors (lowercased,
punctuation-stripped); sentences with zero vocabulary hits get the zero
vector and are counted for the provenance sidecar.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .text import tokenize


class VectorTable:
    def __init__(self, vectors: dict[str, np.ndarray], dim: int, sha256: str):
        self.vectors = vectors
        self.dim = dim
        self.sha256 = sha256

    @classmethod
    def load(cls, path: str | Path) -> "VectorTable":
        raw = Path(path).read_bytes()
        lines = raw.decode("utf-8").splitlines()
        if not lines:
            raise ValueError(f"{path}: empty vector table")
        try:
            count, dim = (int(x) for x in lines[0].split())
        except ValueError as exc:
            raise ValueError(f"{path}: bad header line {lines[0]!r}") from exc
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(lines[1 : count + 1], start=2):
            parts = line.split()
            if len(parts) != dim + 1:
                raise ValueError(f"{path}:{lineno}: expected {dim} values")
            vectors[parts[0]] = np.array(parts[1:], dtype=np.float64)
        if len(vectors) != count:
            raise ValueError(f"{path}: header promises {count} entries, found {len(vectors)}")
        return cls(vectors, dim, hashlib.sha256(raw).hexdigest())

    def pool(self, texts: list[str]) -> tuple[np.ndarray, int]:
        """Token-average each sentence; returns the matrix and the number
        of sentences with zero vocabulary hits."""
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        misses = 0
        for i, text in enumerate(texts):
            hits = [self.vectors[t] for t in tokenize(text) if t in self.vectors]
            if hits:
                out[i] = np.mean(hits, axis=0)
            else:
                misses += 1
        return out.astype(np.float32), misses


def build_hashed_table(vocab: list[str], dim: int, name: str, path: str | Path) -> None:
    """Write a deterministic stand-in table for a vocabulary, for use when
    the real pretrained table is not available locally."""
    lines = [f"{len(vocab)} {dim}"]
    for token in vocab:
        digest = hashlib.sha256(f"{name}|{token}".encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        vec = rng.standard_normal(dim)
        lines.append(token + " " + " ".join(f"{x:.6f}" for x in vec))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
