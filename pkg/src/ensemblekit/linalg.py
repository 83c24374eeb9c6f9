"""Dense numeric kernels: PCA via covariance eigendecomposition, cosine
similarity, and vector concatenation.

All reductions run in 64-bit regardless of input dtype; PCA component
signs are fixed so results are identical across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_NORM_EPS = 1e-12


@dataclass
class PcaModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing

    @property
    def input_dim(self) -> int:
        return self.components.shape[1]

    @property
    def output_dim(self) -> int:
        return self.components.shape[0]


def pca_fit(data: np.ndarray, target_dim: int) -> PcaModel:
    """Fit PCA on the rows of ``data``; effective k = min(k, d, n-1).

    Components are the top eigenvectors of the sample covariance of the
    mean-centered data. Each component's sign is chosen so its
    largest-magnitude entry is positive.
    """
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("data must be 2-D")
    n, d = X.shape
    if n < 2:
        raise ValueError(f"PCA needs at least 2 rows, got {n}")
    k = min(target_dim, d, n - 1)
    if k < 1:
        raise ValueError(f"target_dim {target_dim} yields no components")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = (Xc.T @ Xc) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:k]
    variance = np.clip(eigvals[order], 0.0, None)
    components = eigvecs[:, order].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(mean=mean, components=components, explained_variance=variance)


def pca_transform(model: PcaModel, data: np.ndarray) -> np.ndarray:
    """Project rows of ``data`` onto the model's components."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.input_dim:
        raise ValueError(
            f"dimension mismatch: data has {X.shape[1]} columns, model expects {model.input_dim}"
        )
    return (X - model.mean) @ model.components.T


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between u and v; 0.0 if either norm vanishes."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < ZERO_NORM_EPS or nv < ZERO_NORM_EPS:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def rowwise_cosine(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cosine similarity between matching rows of two n x k matrices."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    denom = na * nb
    out = np.zeros(A.shape[0])
    ok = (na >= ZERO_NORM_EPS) & (nb >= ZERO_NORM_EPS)
    out[ok] = np.einsum("ij,ij->i", A[ok], B[ok]) / denom[ok]
    return np.clip(out, -1.0, 1.0)


def concat(vectors: list[np.ndarray]) -> np.ndarray:
    """Order-preserving concatenation of 1-D vectors."""
    if not vectors:
        raise ValueError("concat of empty list")
    return np.concatenate([np.asarray(v).ravel() for v in vectors])
