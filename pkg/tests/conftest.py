import numpy as np
import pytest

from ensemblekit.network import TrainConfig
from ensemblekit.synth import SourceSpec, SyntheticSpec, gen_synthetic


def fast_cfg(**kw):
    """Training config sized for tests, not the paper's defaults."""
    base = dict(batch_size=32, learning_rate=1e-2, weight_decay=1e-6, epochs=20, seed=0)
    base.update(kw)
    return TrainConfig(**base)


def joint_spec(n=500, dim=32, seed=0, label_noise=0.0, kg=False):
    sources = [SourceSpec("base", dim, "signal"), SourceSpec("large", dim, "signal")]
    if kg:
        sources += [
            SourceSpec("cnet", 300, "kg-correlated"),
            SourceSpec("wiki", 500, "kg-correlated"),
        ]
    return SyntheticSpec(n=n, classes=2, sources=sources, seed=seed, label_noise=label_noise)


@pytest.fixture
def joint_dataset():
    return gen_synthetic(joint_spec(n=300, dim=16, seed=1), seed=1)


def perceptron_separable(X, y, iters=2000):
    """Exact-style separability oracle: perceptron converges iff separable
    (with margin, in bounded iterations)."""
    X = np.hstack([np.asarray(X, dtype=np.float64), np.ones((len(X), 1))])
    t = 2.0 * np.asarray(y) - 1.0
    w = np.zeros(X.shape[1])
    for _ in range(iters):
        margins = t * (X @ w)
        bad = np.where(margins <= 0)[0]
        if bad.size == 0:
            return True
        w += t[bad[0]] * X[bad[0]]
    return False
