"""Deep ensemble: the semi ensemble's classifier trained with a
knowledge-similarity reward weighting each sample's loss.

Per-sample reward: R_i = beta * cos(cnet_i, fused_i)
                       + (1 - beta) * cos(wiki_i, fused_i),
computed once from PCA-reduced knowledge-graph and fused embeddings and
held fixed for the whole training run. The default "shifted" mode maps
raw cosine from [-1, 1] to [0, 1] so a dissimilar sample is downweighted
instead of having its gradient sign flipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import network
from .data import EmbeddingSet, SplitPlan
from .errors import BadSplit
from .linalg import PcaModel, pca_fit, pca_transform, rowwise_cosine
from .network import NetworkLayout, TrainConfig
from .semi import FusedDataset, TrainedEnsemble, predict_matrix

RAW = "raw"
SHIFTED = "shifted"


@dataclass
class KnowledgeSources:
    cnet: EmbeddingSet
    wiki: EmbeddingSet


@dataclass
class ReducedKnowledge:
    """Knowledge sources projected to the fused dimension, all samples."""

    cnet: np.ndarray  # (n, k)
    wiki: np.ndarray  # (n, k)
    cnet_pca: PcaModel
    wiki_pca: PcaModel

    def rows(self, indices) -> tuple[np.ndarray, np.ndarray]:
        idx = np.asarray(indices, dtype=np.int64)
        return self.cnet[idx], self.wiki[idx]


@dataclass
class RewardVector:
    beta: float
    rewards: np.ndarray
    normalization: str


def reduce_kg(kg: KnowledgeSources, split: SplitPlan, target_dim: int) -> ReducedKnowledge:
    """PCA-reduce each knowledge source to the fused dim, fitting on train rows."""
    train = np.asarray(split.train_indices, dtype=np.int64)
    out = {}
    for name, emb in (("cnet", kg.cnet), ("wiki", kg.wiki)):
        mat = emb.vectors.astype(np.float64)
        pca = pca_fit(mat[train], target_dim)
        out[name] = (pca_transform(pca, mat), pca)
    return ReducedKnowledge(
        cnet=out["cnet"][0], wiki=out["wiki"][0],
        cnet_pca=out["cnet"][1], wiki_pca=out["wiki"][1],
    )


def compute_rewards(
    fused: np.ndarray,
    cnet: np.ndarray,
    wiki: np.ndarray,
    beta: float,
    normalization: str = SHIFTED,
) -> RewardVector:
    """Blend of cosine similarities between fused rows and each KG source."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta {beta} not in [0, 1]")
    if normalization not in (RAW, SHIFTED):
        raise ValueError(f"unknown normalization {normalization!r}")
    fused = np.asarray(fused, dtype=np.float64)
    if fused.shape != np.shape(cnet) or fused.shape != np.shape(wiki):
        raise ValueError(
            f"shape mismatch: fused {fused.shape}, cnet {np.shape(cnet)}, wiki {np.shape(wiki)}"
        )
    raw = beta * rowwise_cosine(cnet, fused) + (1.0 - beta) * rowwise_cosine(wiki, fused)
    rewards = (raw + 1.0) / 2.0 if normalization == SHIFTED else raw
    return RewardVector(beta=float(beta), rewards=rewards, normalization=normalization)


def train_de(
    train: FusedDataset,
    golds,
    cnet_train: np.ndarray,
    wiki_train: np.ndarray,
    beta: float,
    cfg: TrainConfig,
    normalization: str = SHIFTED,
    hidden: tuple[int, ...] = (64,),
    classes: int | None = None,
) -> TrainedEnsemble:
    """Train the classifier with fixed per-sample knowledge rewards."""
    golds = np.asarray(golds, dtype=np.int64)
    if golds.shape[0] != train.fused.shape[0]:
        raise ValueError("golds length must match fused row count")
    rewards = compute_rewards(train.fused, cnet_train, wiki_train, beta, normalization)
    c = classes if classes is not None else int(golds.max()) + 1
    layout = NetworkLayout(input_dim=train.fused.shape[1], hidden=hidden, classes=max(c, 2))
    net = network.init(layout, cfg.seed)
    de_cfg = TrainConfig(
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
        epochs=cfg.epochs,
        seed=cfg.seed,
        loss=network.REWARD_CE,
        loss_sign=cfg.loss_sign,
    )
    net = network.train(net, train.fused, golds, rewards.rewards, de_cfg)
    return TrainedEnsemble(
        kind="de",
        pca=train.pca,
        net=net,
        source_order=train.source_order,
        beta=float(beta),
        reward_norm=normalization,
    )


def fit_beta(
    train: FusedDataset,
    golds,
    cnet_train: np.ndarray,
    wiki_train: np.ndarray,
    grid_step: float = 0.1,
    cfg: TrainConfig = None,
    normalization: str = SHIFTED,
    hidden: tuple[int, ...] = (64,),
    classes: int | None = None,
) -> tuple[float, TrainedEnsemble]:
    """Grid-search beta by validation accuracy on the last 10% of train rows.

    Each candidate trains on the remaining 90%; ties prefer the larger
    beta. The returned model is retrained on the full training split at
    the selected beta.
    """
    if cfg is None:
        cfg = TrainConfig()
    golds = np.asarray(golds, dtype=np.int64)
    m = train.fused.shape[0]
    if m < 10:
        raise BadSplit(f"training split of {m} rows too small for a validation holdout")
    steps = int(round(1.0 / grid_step))
    if abs(steps * grid_step - 1.0) > 1e-9 or steps < 1:
        raise ValueError(f"grid_step {grid_step} must divide 1 evenly")
    n_val = max(1, int(round(0.1 * m)))
    fit_part = FusedDataset(
        fused=train.fused[: m - n_val], pca=train.pca, source_order=train.source_order
    )
    fit_golds = golds[: m - n_val]
    val_x = train.fused[m - n_val :]
    val_y = golds[m - n_val :]
    c = classes if classes is not None else int(golds.max()) + 1

    best_beta, best_acc = None, -1.0
    for i in range(steps + 1):
        beta = i / steps
        model = train_de(
            fit_part, fit_golds, cnet_train[: m - n_val], wiki_train[: m - n_val],
            beta, cfg, normalization, hidden, classes=c,
        )
        acc = float(np.mean(predict_matrix(model, val_x) == val_y))
        if acc >= best_acc:
            best_beta, best_acc = beta, acc
    final = train_de(
        train, golds, cnet_train, wiki_train, best_beta, cfg, normalization, hidden, classes=c
    )
    return best_beta, final
