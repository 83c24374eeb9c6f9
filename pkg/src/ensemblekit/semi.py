"""Semi ensemble: concatenate per-source embeddings, PCA-reduce, train a
cross-entropy classifier. Also defines TrainedEnsemble, shared with the
deep ensemble, and its serialization."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import network
from .data import LabeledDataset, SplitPlan
from .errors import BadMagic, EmptySplit, Truncated, UnsupportedVersion
from .linalg import PcaModel, pca_fit, pca_transform
from .network import Network, NetworkLayout, TrainConfig
from .shallow import ProbabilityTable

PCA_MAGIC = b"PCAV"
ENS_MAGIC = b"ENSV"


@dataclass
class FusedDataset:
    fused: np.ndarray  # (n_train, k) PCA-reduced concatenation
    pca: PcaModel
    source_order: list[str]


@dataclass
class TrainedEnsemble:
    kind: str  # "se" | "de"
    pca: PcaModel
    net: Network
    source_order: list[str]
    beta: float | None = None
    reward_norm: str | None = None


def _stack(dataset: LabeledDataset, sources: list[str], indices) -> np.ndarray:
    for sid in sources:
        if sid not in dataset.sources:
            raise KeyError(f"unknown source id {sid!r}")
    idx = np.asarray(indices, dtype=np.int64)
    return np.concatenate(
        [dataset.sources[sid].vectors[idx].astype(np.float64) for sid in sources], axis=1
    )


def fuse(
    dataset: LabeledDataset,
    sources: list[str],
    split: SplitPlan,
    target_dim: int,
) -> tuple[FusedDataset, np.ndarray]:
    """Concatenate sources in order and PCA-reduce, fitting on train rows only."""
    train_raw = _stack(dataset, sources, split.train_indices)
    pca = pca_fit(train_raw, target_dim)
    train_fused = pca_transform(pca, train_raw)
    if split.test_indices:
        test_raw = _stack(dataset, sources, split.test_indices)
        test_fused = pca_transform(pca, test_raw)
    else:
        test_fused = np.zeros((0, pca.output_dim))
    return FusedDataset(fused=train_fused, pca=pca, source_order=list(sources)), test_fused


def train_se(
    train: FusedDataset,
    golds,
    cfg: TrainConfig,
    hidden: tuple[int, ...] = (64,),
    classes: int | None = None,
) -> TrainedEnsemble:
    golds = np.asarray(golds, dtype=np.int64)
    if golds.shape[0] != train.fused.shape[0]:
        raise ValueError("golds length must match fused row count")
    c = classes if classes is not None else int(golds.max()) + 1
    layout = NetworkLayout(input_dim=train.fused.shape[1], hidden=hidden, classes=max(c, 2))
    net = network.init(layout, cfg.seed)
    net = network.train(net, train.fused, golds, None, cfg)
    return TrainedEnsemble(kind="se", pca=train.pca, net=net, source_order=train.source_order)


def predict_se(
    model: TrainedEnsemble, dataset: LabeledDataset, split: SplitPlan
) -> tuple[np.ndarray, ProbabilityTable]:
    """Fuse the test rows with the stored PCA, then classify."""
    if not split.test_indices:
        raise EmptySplit("split has no test samples")
    raw = _stack(dataset, model.source_order, split.test_indices)
    fused = pca_transform(model.pca, raw)
    probs = network.forward(model.net, fused)
    labels = np.argmax(probs, axis=1)
    return labels, ProbabilityTable(source_id=model.kind, probs=probs)


def predict_matrix(model: TrainedEnsemble, fused: np.ndarray) -> np.ndarray:
    """Argmax labels for already-fused rows (validation holdouts)."""
    return np.argmax(network.forward(model.net, fused), axis=1)


def _pack_f64(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def pca_to_bytes(model: PcaModel) -> bytes:
    head = PCA_MAGIC + struct.pack("<BII", 1, model.input_dim, model.output_dim)
    return head + _pack_f64(model.mean) + _pack_f64(model.components) + _pack_f64(
        model.explained_variance
    )


def pca_from_bytes(blob: bytes) -> PcaModel:
    if blob[:4] != PCA_MAGIC:
        raise BadMagic(f"bad PCA magic {blob[:4]!r}")
    version, d, k = struct.unpack_from("<BII", blob, 4)
    if version != 1:
        raise UnsupportedVersion(f"PCA blob version {version}")
    pos = 13
    need = 8 * (d + k * d + k)
    if len(blob) != pos + need:
        raise Truncated("PCA blob size mismatch")
    mean = np.frombuffer(blob, dtype="<f8", count=d, offset=pos).copy()
    pos += 8 * d
    components = np.frombuffer(blob, dtype="<f8", count=k * d, offset=pos).reshape(k, d).copy()
    pos += 8 * k * d
    variance = np.frombuffer(blob, dtype="<f8", count=k, offset=pos).copy()
    return PcaModel(mean=mean, components=components, explained_variance=variance)


def ensemble_to_bytes(model: TrainedEnsemble) -> bytes:
    pca_blob = pca_to_bytes(model.pca)
    net_blob = network.to_bytes(model.net)
    order = "\t".join(model.source_order).encode("utf-8")
    kind = model.kind.encode("utf-8")
    norm = (model.reward_norm or "").encode("utf-8")
    beta = -1.0 if model.beta is None else float(model.beta)
    head = ENS_MAGIC + struct.pack(
        "<BHHHdII", 1, len(kind), len(order), len(norm), beta, len(pca_blob), len(net_blob)
    )
    return head + kind + order + norm + pca_blob + net_blob


def ensemble_from_bytes(blob: bytes) -> TrainedEnsemble:
    if blob[:4] != ENS_MAGIC:
        raise BadMagic(f"bad ensemble magic {blob[:4]!r}")
    version, n_kind, n_order, n_norm, beta, n_pca, n_net = struct.unpack_from("<BHHHdII", blob, 4)
    if version != 1:
        raise UnsupportedVersion(f"ensemble blob version {version}")
    pos = 4 + struct.calcsize("<BHHHdII")
    kind = blob[pos : pos + n_kind].decode("utf-8")
    pos += n_kind
    order = blob[pos : pos + n_order].decode("utf-8").split("\t")
    pos += n_order
    norm = blob[pos : pos + n_norm].decode("utf-8") or None
    pos += n_norm
    pca = pca_from_bytes(blob[pos : pos + n_pca])
    pos += n_pca
    net = network.from_bytes(blob[pos : pos + n_net])
    pos += n_net
    if pos != len(blob):
        raise Truncated("trailing bytes in ensemble blob")
    return TrainedEnsemble(
        kind=kind,
        pca=pca,
        net=net,
        source_order=order,
        beta=None if beta < 0 else beta,
        reward_norm=norm,
    )
