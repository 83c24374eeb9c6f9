"""Writers for the EMB binary container and the labels TSV.

EMB layout, little-endian: magic ``EMBV``, version u8, dtype u8 (0 =
float32), reserved u16, row count u64, dim u32, then the row-major
float32 payload. This mirrors the consumer's reader byte for byte.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

EMB_MAGIC = b"EMBV"
EMB_VERSION = 1
EMB_DTYPE_F32 = 0
_HEADER = struct.Struct("<4sBBHQI")


def write_emb(vectors: np.ndarray, path: str | Path) -> None:
    vec = np.ascontiguousarray(vectors, dtype="<f4")
    if vec.ndim != 2:
        raise ValueError(f"expected an n x d matrix, got shape {vec.shape}")
    if not np.isfinite(vec).all():
        raise ValueError("refusing to write non-finite values")
    n, dim = vec.shape
    header = _HEADER.pack(EMB_MAGIC, EMB_VERSION, EMB_DTYPE_F32, 0, n, dim)
    Path(path).write_bytes(header + vec.tobytes())


def write_labels_tsv(rows: list[tuple[str, int]], path: str | Path) -> None:
    lines = ["id\tlabel"] + [f"{sid}\t{label}" for sid, label in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
