"""Ensembling strategies over precomputed embeddings, with accuracy and
Cohen's kappa evaluation under a multi-fraction split protocol."""

from .data import (
    EmbeddingSet,
    LabeledDataset,
    LabelTable,
    SplitPlan,
    align,
    load_embeddings,
    load_labels,
    make_splits,
    write_embeddings,
    write_labels,
)
from .linalg import PcaModel, concat, cosine_similarity, pca_fit, pca_transform
from .metrics import ConfusionMatrix, accuracy, cohen_kappa, confusion
from .network import Network, NetworkLayout, TrainConfig
from .runner import ExperimentConfig, ablate, emit, run
from .synth import SyntheticSpec, gen_synthetic

__version__ = "0.1.0"
