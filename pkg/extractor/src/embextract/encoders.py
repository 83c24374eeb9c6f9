"""Sentence encoders.

Two encoder families share one interface (``encode(texts) -> n x d``):

- ``hashed-*``: a deterministic bag-of-words projection. Every token maps
  to a fixed Gaussian vector seeded from a hash of the encoder name and
  the token; a sentence is the mean of its token vectors. No checkpoint
  needed, identical output on every machine, and the base/large variants
  produce the contract dims (768/1024).
- ``sbert:<model>``: a pretrained sentence-transformers checkpoint, used
  when one is available locally. The model name is recorded verbatim in
  the provenance sidecar.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .text import tokenize

BASE_DIM = 768
LARGE_DIM = 1024


class EmptyTextError(ValueError):
    pass


class HashedEncoder:
    """Deterministic mean-pooled token-hash encoder."""

    def __init__(self, name: str, dim: int):
        self.name = name
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            digest = hashlib.sha256(f"{self.name}|{token}".encode()).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            vec = rng.standard_normal(self.dim)
            self._cache[token] = vec
        return vec

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            if not text.strip():
                raise EmptyTextError(f"row {i}: empty text")
            tokens = tokenize(text)
            if tokens:
                out[i] = np.mean([self._token_vector(t) for t in tokens], axis=0)
        return out.astype(np.float32)

    def provenance(self) -> dict:
        return {"kind": "hashed", "name": self.name, "dim": self.dim}


class SbertEncoder:
    """Wrapper over a locally cached sentence-transformers checkpoint."""

    def __init__(self, model_name: str):
        from sentence_transformers import SentenceTransformer  # checkpoint required

        self.model_name = model_name
        self._model = SentenceTransformer(model_name)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        for i, text in enumerate(texts):
            if not text.strip():
                raise EmptyTextError(f"row {i}: empty text")
        return np.asarray(
            self._model.encode(texts, convert_to_numpy=True, show_progress_bar=False),
            dtype=np.float32,
        )

    def provenance(self) -> dict:
        return {"kind": "sbert", "name": self.model_name, "dim": self.dim}


def make_encoder(spec: str):
    """``base`` / ``large`` pick the hashed encoders at the contract dims;
    ``sbert:<model>`` loads a pretrained checkpoint."""
    if spec == "base":
        return HashedEncoder("base", BASE_DIM)
    if spec == "large":
        return HashedEncoder("large", LARGE_DIM)
    if spec.startswith("hashed:"):
        name, dim = spec.split(":", 2)[1:]
        return HashedEncoder(name, int(dim))
    if spec.startswith("sbert:"):
        return SbertEncoder(spec.split(":", 1)[1])
    raise ValueError(f"unknown encoder spec {spec!r}")
