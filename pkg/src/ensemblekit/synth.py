"""Synthetic dataset generator with known decision structure.

Three source roles:

* ``signal`` — carries class information. With two or more signal sources
  (binary labels, joint mode) the class is recoverable only from the
  sources together: one source holds a broad latent value, the other holds
  the class margin minus that value, so either alone is near chance while
  their concatenation is linearly separable.
* ``noise`` — i.i.d. Gaussian, independent of labels.
* ``kg-correlated`` — a zero-padded copy of the concatenated signal
  vectors, sign-flipped for label-noised samples. Cosine similarity with
  the fused embedding is then high exactly where the label is clean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import EmbeddingSet, LabeledDataset, LabelTable

# Joint-mode geometry: latent std >> margin keeps single sources near
# chance; per-coordinate jitter << margin keeps the concatenation separable.
_LATENT_STD = 8.0
_MARGIN = 1.0
_JITTER = 0.05
_CLASS_MARGIN = 2.0


@dataclass
class SourceSpec:
    id: str
    dim: int
    role: str  # signal | noise | kg-correlated


@dataclass
class SyntheticSpec:
    n: int
    classes: int
    sources: list[SourceSpec]
    seed: int = 0
    label_noise: float = 0.0
    signal_mode: str = "auto"  # auto | joint | direct

    @classmethod
    def from_json(cls, path: str | Path) -> "SyntheticSpec":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticSpec":
        sources = [SourceSpec(s["id"], int(s["dim"]), s.get("role", "noise")) for s in doc["sources"]]
        return cls(
            n=int(doc["n"]),
            classes=int(doc["classes"]),
            sources=sources,
            seed=int(doc.get("seed", 0)),
            label_noise=float(doc.get("label_noise", 0.0)),
            signal_mode=doc.get("signal_mode", "auto"),
        )


def _validate(spec: SyntheticSpec) -> None:
    if spec.n <= 0:
        raise ValueError("degenerate spec: zero samples")
    if spec.classes < 2:
        raise ValueError("degenerate spec: need at least 2 classes")
    if not spec.sources:
        raise ValueError("degenerate spec: no sources")
    for src in spec.sources:
        if src.dim <= 0:
            raise ValueError(f"degenerate spec: source {src.id!r} has zero dims")
        if src.role not in ("signal", "noise", "kg-correlated"):
            raise ValueError(f"unknown role {src.role!r} for source {src.id!r}")
    if not 0.0 <= spec.label_noise < 1.0:
        raise ValueError("label_noise must be in [0, 1)")


def gen_synthetic(spec: SyntheticSpec, seed: int | None = None) -> LabeledDataset:
    """Build a reproducible dataset whose ground truth is known by construction."""
    _validate(spec)
    if seed is None:
        seed = spec.seed
    rng = np.random.Generator(np.random.PCG64(seed))
    n, c = spec.n, spec.classes

    y_clean = rng.integers(0, c, size=n)
    noisy = np.zeros(n, dtype=bool)
    n_noisy = int(round(spec.label_noise * n))
    if n_noisy:
        noisy[rng.permutation(n)[:n_noisy]] = True
    y = y_clean.copy()
    # Flip noised labels to a different class.
    shift = rng.integers(1, c, size=n)
    y[noisy] = (y_clean[noisy] + shift[noisy]) % c

    signal_srcs = [s for s in spec.sources if s.role == "signal"]
    mode = spec.signal_mode
    if mode == "auto":
        mode = "joint" if (len(signal_srcs) >= 2 and c == 2) else "direct"
    if mode == "joint" and (len(signal_srcs) < 2 or c != 2):
        raise ValueError("joint signal mode needs >= 2 signal sources and 2 classes")

    mats: dict[str, np.ndarray] = {}
    sign = 2.0 * y_clean - 1.0 if c == 2 else None

    if signal_srcs:
        if mode == "joint":
            latents = [rng.normal(0.0, _LATENT_STD, size=n) for _ in signal_srcs[:-1]]
            coords = list(latents) + [_MARGIN * sign - np.sum(latents, axis=0)]
            for src, coord in zip(signal_srcs, coords):
                mat = rng.normal(0.0, 1.0, size=(n, src.dim))
                mat[:, 0] = coord + rng.normal(0.0, _JITTER, size=n)
                mats[src.id] = mat
        else:
            for src in signal_srcs:
                means = rng.normal(0.0, 1.0, size=(c, src.dim))
                means /= np.linalg.norm(means, axis=1, keepdims=True)
                mat = _CLASS_MARGIN * means[y_clean] + rng.normal(0.0, 1.0, size=(n, src.dim))
                mats[src.id] = mat

    for src in spec.sources:
        if src.role == "noise":
            mats[src.id] = rng.normal(0.0, 1.0, size=(n, src.dim))

    kg_srcs = [s for s in spec.sources if s.role == "kg-correlated"]
    if kg_srcs:
        if not signal_srcs:
            raise ValueError("kg-correlated sources need at least one signal source")
        fused = np.concatenate([mats[s.id] for s in signal_srcs], axis=1)
        flip = np.where(noisy, -1.0, 1.0)[:, None]
        for src in kg_srcs:
            if src.dim < fused.shape[1]:
                raise ValueError(
                    f"kg-correlated source {src.id!r} dim {src.dim} smaller than fused dim {fused.shape[1]}"
                )
            mat = rng.normal(0.0, 1e-3, size=(n, src.dim))
            mat[:, : fused.shape[1]] += flip * fused
            mats[src.id] = mat

    ids = [f"s{i:06d}" for i in range(n)]
    sources = {
        src.id: EmbeddingSet(source_id=src.id, vectors=mats[src.id].astype(np.float32), sample_ids=ids)
        for src in spec.sources
    }
    labels = LabelTable(entries=[(sid, int(lab)) for sid, lab in zip(ids, y)], num_classes=c)
    return LabeledDataset(sources=sources, labels=labels)
