"""Embedding dataset I/O: EMB binary files, label TSVs, alignment, splits.

The EMB container is little-endian: magic ``EMBV``, version u8, dtype u8
(0 = float32), reserved u16 (must be 0), n as u64, dim as u32, then
``n * dim`` float32 values row-major. Row i corresponds to row i of the
labels manifest.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadLabel,
    BadMagic,
    BadSplit,
    DuplicateId,
    ExtraSample,
    MissingSample,
    NonFiniteValue,
    Truncated,
    UnsupportedDtype,
    UnsupportedVersion,
)

EMB_MAGIC = b"EMBV"
EMB_VERSION = 1
EMB_DTYPE_F32 = 0
_HEADER = struct.Struct("<4sBBHQI")

# Recorded in report provenance; split permutations depend on it.
PRNG_NAME = "numpy-PCG64"


@dataclass
class EmbeddingSet:
    """One source's n x dim matrix of float32 feature vectors."""

    source_id: str
    vectors: np.ndarray
    sample_ids: list[str]

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D matrix")
        if len(self.sample_ids) != self.vectors.shape[0]:
            raise ValueError("sample_ids length must match row count")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise DuplicateId(f"duplicate sample ids in source {self.source_id!r}")
        bad = np.argwhere(~np.isfinite(self.vectors))
        if bad.size:
            raise NonFiniteValue(int(bad[0, 0]), int(bad[0, 1]))

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass
class LabelTable:
    """Ordered (sample_id, label) pairs with the number of classes."""

    entries: list[tuple[str, int]]
    num_classes: int

    @property
    def sample_ids(self) -> list[str]:
        return [sid for sid, _ in self.entries]

    @property
    def labels(self) -> np.ndarray:
        return np.array([lab for _, lab in self.entries], dtype=np.int64)


@dataclass
class LabeledDataset:
    """Aligned embedding sources plus labels, all in one sample order."""

    sources: dict[str, EmbeddingSet]
    labels: LabelTable

    @property
    def m(self) -> int:
        return len(self.labels.entries)

    @property
    def num_classes(self) -> int:
        return self.labels.num_classes

    @property
    def y(self) -> np.ndarray:
        return self.labels.labels


@dataclass
class SplitPlan:
    """Deterministic train/test index partition of 0..m-1."""

    seed: int
    test_fraction: float
    train_indices: list[int]
    test_indices: list[int]


def write_embeddings(emb: EmbeddingSet, path: str | Path) -> None:
    """Write the EMB binary container (round-trips byte-for-byte)."""
    vec = np.ascontiguousarray(emb.vectors, dtype="<f4")
    header = _HEADER.pack(EMB_MAGIC, EMB_VERSION, EMB_DTYPE_F32, 0, emb.n, emb.dim)
    with open(path, "wb") as f:
        f.write(header)
        f.write(vec.tobytes())


def load_embeddings(path: str | Path, sample_ids: list[str] | None = None) -> EmbeddingSet:
    """Read an EMB file.

    The container carries no sample ids; pass the manifest's ids (same
    order) to bind them, otherwise positional ids ``row000000...`` are used.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise Truncated(f"{path}: file shorter than header")
    magic, version, dtype, reserved, n, dim = _HEADER.unpack_from(raw)
    if magic != EMB_MAGIC:
        raise BadMagic(f"{path}: bad magic {magic!r}")
    if version != EMB_VERSION:
        raise UnsupportedVersion(f"{path}: version {version}")
    if dtype != EMB_DTYPE_F32:
        raise UnsupportedDtype(f"{path}: dtype code {dtype}")
    if reserved != 0:
        raise UnsupportedVersion(f"{path}: reserved field must be 0, got {reserved}")
    payload = raw[_HEADER.size:]
    expected = n * dim * 4
    if len(payload) != expected:
        raise Truncated(
            f"{path}: expected {expected} payload bytes for n={n}, dim={dim}, got {len(payload)}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(n, dim)
    bad = np.argwhere(~np.isfinite(vectors))
    if bad.size:
        raise NonFiniteValue(int(bad[0, 0]), int(bad[0, 1]))
    if sample_ids is None:
        sample_ids = [f"row{i:06d}" for i in range(n)]
    elif len(sample_ids) != n:
        raise MissingSample(
            f"{path}: manifest has {len(sample_ids)} rows but file has {n}"
        )
    return EmbeddingSet(source_id=path.stem, vectors=vectors.copy(), sample_ids=list(sample_ids))


def write_labels(labels: LabelTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("id\tlabel\n")
        for sid, lab in labels.entries:
            f.write(f"{sid}\t{lab}\n")


def load_labels(path: str | Path, num_classes: int | None = None) -> LabelTable:
    """Read the labels TSV; class count is 1 + max label unless overridden."""
    entries: list[tuple[str, int]] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header.split("\t")[:2] != ["id", "label"]:
            raise BadLabel(f"{path}: expected header 'id\\tlabel', got {header!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise BadLabel(f"{path}:{lineno}: expected 2 columns")
            sid, raw = parts
            if sid in seen:
                raise DuplicateId(f"{path}:{lineno}: duplicate sample id {sid!r}")
            seen.add(sid)
            try:
                lab = int(raw)
            except ValueError:
                raise BadLabel(f"{path}:{lineno}: non-integer label {raw!r}") from None
            if lab < 0:
                raise BadLabel(f"{path}:{lineno}: negative label {lab}")
            entries.append((sid, lab))
    if not entries:
        raise BadLabel(f"{path}: no label rows")
    inferred = max(lab for _, lab in entries) + 1
    c = num_classes if num_classes is not None else max(inferred, 2)
    if inferred > c:
        raise BadLabel(f"{path}: label {inferred - 1} out of range for c={c}")
    return LabelTable(entries=entries, num_classes=c)


def align(sources: list[EmbeddingSet], labels: LabelTable) -> LabeledDataset:
    """Reorder every source to the label table's sample order.

    Fails on any id mismatch rather than silently dropping samples.
    """
    order = labels.sample_ids
    want = set(order)
    aligned: dict[str, EmbeddingSet] = {}
    for src in sources:
        have = set(src.sample_ids)
        missing = want - have
        if missing:
            raise MissingSample(
                f"source {src.source_id!r} missing sample id(s): {sorted(missing)[:5]}"
            )
        extra = have - want
        if extra:
            raise ExtraSample(
                f"source {src.source_id!r} has unlabeled sample id(s): {sorted(extra)[:5]}"
            )
        pos = {sid: i for i, sid in enumerate(src.sample_ids)}
        idx = np.array([pos[sid] for sid in order], dtype=np.int64)
        aligned[src.source_id] = EmbeddingSet(
            source_id=src.source_id,
            vectors=src.vectors[idx],
            sample_ids=list(order),
        )
    return LabeledDataset(sources=aligned, labels=labels)


def _split_rng(seed: int, fraction: float) -> np.random.Generator:
    # Sub-stream keyed on (seed, fraction) so each fraction shuffles
    # independently and identically across platforms.
    key = int(round(fraction * 1_000_000))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, key))))


def make_splits(m: int, fractions: list[float], seed: int) -> list[SplitPlan]:
    """One SplitPlan per test fraction; |test| = round(fraction * m)."""
    if m < 2:
        raise BadSplit(f"need at least 2 samples, got {m}")
    plans = []
    for frac in fractions:
        if not 0.0 < frac < 1.0:
            raise BadSplit(f"fraction {frac} not in (0, 1)")
        n_test = int(np.floor(frac * m + 0.5))
        if n_test == 0 or n_test == m:
            raise BadSplit(f"fraction {frac} leaves an empty train or test set at m={m}")
        perm = _split_rng(seed, frac).permutation(m)
        plans.append(
            SplitPlan(
                seed=seed,
                test_fraction=frac,
                train_indices=[int(i) for i in perm[n_test:]],
                test_indices=[int(i) for i in perm[:n_test]],
            )
        )
    return plans
