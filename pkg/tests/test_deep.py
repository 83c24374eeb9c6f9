import numpy as np
import pytest

import ensemblekit.deep as deep_mod
from ensemblekit.data import make_splits
from ensemblekit.deep import (
    KnowledgeSources,
    compute_rewards,
    fit_beta,
    reduce_kg,
    train_de,
)
from ensemblekit.errors import BadSplit
from ensemblekit.linalg import cosine_similarity
from ensemblekit.semi import fuse, predict_se, train_se
from ensemblekit.synth import gen_synthetic

from conftest import fast_cfg, joint_spec


def _rand_mats(n=12, k=5, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, k)), rng.normal(size=(n, k)), rng.normal(size=(n, k))


class TestComputeRewards:
    def test_beta_one_is_cnet_only(self):
        fused, cnet, wiki = _rand_mats()
        rv = compute_rewards(fused, cnet, wiki, 1.0, "raw")
        expected = [cosine_similarity(cnet[i], fused[i]) for i in range(len(fused))]
        np.testing.assert_allclose(rv.rewards, expected, atol=1e-12)

    def test_beta_zero_is_wiki_only(self):
        fused, cnet, wiki = _rand_mats(seed=1)
        rv = compute_rewards(fused, cnet, wiki, 0.0, "raw")
        expected = [cosine_similarity(wiki[i], fused[i]) for i in range(len(fused))]
        np.testing.assert_allclose(rv.rewards, expected, atol=1e-12)

    def test_identical_vectors_reward_one(self):
        fused = np.ones((4, 3))
        for beta in (0.0, 0.3, 1.0):
            rv = compute_rewards(fused, fused.copy(), fused.copy(), beta, "raw")
            np.testing.assert_allclose(rv.rewards, 1.0, atol=1e-12)

    def test_linear_in_beta(self):
        fused, cnet, wiki = _rand_mats(seed=2)
        r0 = compute_rewards(fused, cnet, wiki, 0.0, "raw").rewards
        r1 = compute_rewards(fused, cnet, wiki, 1.0, "raw").rewards
        for beta in (0.25, 0.5, 0.9):
            rb = compute_rewards(fused, cnet, wiki, beta, "raw").rewards
            np.testing.assert_allclose(rb, beta * r1 + (1 - beta) * r0, atol=1e-6)

    def test_raw_bounds_with_zeros(self):
        rng = np.random.default_rng(3)
        fused = rng.normal(size=(20, 4))
        cnet = rng.normal(size=(20, 4))
        wiki = rng.normal(size=(20, 4))
        fused[3] = 0.0
        cnet[5] = 0.0
        rv = compute_rewards(fused, cnet, wiki, 0.6, "raw")
        assert (rv.rewards >= -1.0).all() and (rv.rewards <= 1.0).all()
        sh = compute_rewards(fused, cnet, wiki, 0.6, "shifted")
        assert (sh.rewards >= 0.0).all() and (sh.rewards <= 1.0).all()

    def test_validation(self):
        fused, cnet, wiki = _rand_mats(seed=4)
        with pytest.raises(ValueError):
            compute_rewards(fused, cnet, wiki, 1.5)
        with pytest.raises(ValueError):
            compute_rewards(fused, cnet[:5], wiki, 0.5)
        with pytest.raises(ValueError):
            compute_rewards(fused, cnet, wiki, 0.5, "weird")


def _fused_setup(seed=0, n=200, label_noise=0.0):
    ds = gen_synthetic(joint_spec(n=n, dim=8, seed=seed, label_noise=label_noise, kg=True), seed=seed)
    split = make_splits(ds.m, [0.2], 42)[0]
    train_idx = np.array(split.train_indices)
    train, _ = fuse(ds, ["base", "large"], split, 100)
    kg = reduce_kg(
        KnowledgeSources(ds.sources["cnet"], ds.sources["wiki"]), split, train.pca.output_dim
    )
    cn, wi = kg.rows(train_idx)
    return ds, split, train_idx, train, cn, wi


class TestTrainDe:
    def test_unit_rewards_match_se_bitwise(self):
        ds, split, train_idx, train, _, _ = _fused_setup(seed=1)
        cfg = fast_cfg(epochs=4, seed=9)
        se = train_se(train, ds.y[train_idx], cfg)
        de = train_de(train, ds.y[train_idx], train.fused.copy(), train.fused.copy(), 0.5, cfg)
        for a, b in zip(se.net.weights + se.net.biases, de.net.weights + de.net.biases):
            np.testing.assert_array_equal(a, b)

    def test_zero_rewards_only_decay(self):
        ds, split, train_idx, train, _, _ = _fused_setup(seed=2)
        # Orthogonal KG rows with raw normalization give exactly zero reward.
        k = train.fused.shape[1]
        zeros = np.zeros_like(train.fused)
        cfg = fast_cfg(epochs=1, seed=3, batch_size=len(train_idx))
        de = train_de(train, ds.y[train_idx], zeros, zeros, 0.5, cfg, normalization="raw")
        from ensemblekit import network
        from ensemblekit.network import NetworkLayout

        ref = network.init(NetworkLayout(input_dim=k, hidden=(64,), classes=2), 3)
        decay = 1.0 - cfg.learning_rate * cfg.weight_decay
        for a, w0 in zip(de.net.weights, ref.weights):
            np.testing.assert_array_equal(
                a, (w0.astype(np.float64) * decay).astype(np.float32)
            )

    def test_noise_masking_helps(self):
        # Oracle: reward-weighted logistic regression beats unweighted
        # on the same noisy data, so the reward signal is usable.
        from sklearn.linear_model import LogisticRegression

        wins = 0
        for seed in range(5):
            ds, split, train_idx, train, cn, wi = _fused_setup(seed=seed, n=300, label_noise=0.2)
            test_idx = np.array(split.test_indices)
            y_tr = ds.y[train_idx]
            rewards = compute_rewards(train.fused, cn, wi, 0.5).rewards
            from ensemblekit.linalg import pca_transform

            test_raw = np.hstack(
                [ds.sources[s].vectors[test_idx] for s in ["base", "large"]]
            ).astype(np.float64)
            test_fused = pca_transform(train.pca, test_raw)
            y_te = ds.y[test_idx]
            plain = LogisticRegression(max_iter=500).fit(train.fused, y_tr)
            weighted = LogisticRegression(max_iter=500).fit(train.fused, y_tr, sample_weight=rewards)
            if weighted.score(test_fused, y_te) >= plain.score(test_fused, y_te):
                wins += 1
        assert wins >= 4

        # Now the engine's own DE vs SE on the same structure.
        wins = 0
        for seed in range(5):
            ds, split, train_idx, train, cn, wi = _fused_setup(seed=seed, n=300, label_noise=0.2)
            y_tr = ds.y[train_idx]
            y_te = ds.y[np.array(split.test_indices)]
            cfg = fast_cfg(epochs=30, seed=seed)
            se = train_se(train, y_tr, cfg)
            de = train_de(train, y_tr, cn, wi, 0.5, cfg)
            se_acc = float(np.mean(predict_se(se, ds, split)[0] == y_te))
            de_acc = float(np.mean(predict_se(de, ds, split)[0] == y_te))
            if de_acc >= se_acc:
                wins += 1
        assert wins >= 4


class TestFitBeta:
    def test_grid_candidate_count(self, monkeypatch):
        ds, split, train_idx, train, cn, wi = _fused_setup(seed=3)
        calls = []
        real = deep_mod.train_de

        def spy(*args, **kw):
            calls.append(args[4] if len(args) > 4 else kw.get("beta"))
            return real(*args, **kw)

        monkeypatch.setattr(deep_mod, "train_de", spy)
        beta, model = deep_mod.fit_beta(
            train, ds.y[train_idx], cn, wi, grid_step=0.5, cfg=fast_cfg(epochs=2)
        )
        # 3 candidates (0, 0.5, 1) plus the final full-train fit.
        assert calls[:3] == [0.0, 0.5, 1.0]
        assert len(calls) == 4
        assert model.beta == pytest.approx(beta)

    def test_identical_kg_tie_breaks_to_one(self):
        ds, split, train_idx, train, cn, _ = _fused_setup(seed=4)
        beta, _ = fit_beta(train, ds.y[train_idx], cn, cn.copy(), grid_step=0.5, cfg=fast_cfg(epochs=2))
        assert beta == 1.0

    def test_cnet_only_correlation_selects_high_beta(self):
        # Only cnet carries the clean/noisy signal; wiki rows are random.
        ds, split, train_idx, train, cn, wi = _fused_setup(seed=5, n=300, label_noise=0.2)
        rng = np.random.default_rng(0)
        wiki_rand = rng.normal(size=wi.shape)
        beta, _ = fit_beta(
            train, ds.y[train_idx], cn, wiki_rand, grid_step=0.25, cfg=fast_cfg(epochs=25, seed=5)
        )
        assert beta >= 0.5

    def test_too_small_train(self):
        ds, split, train_idx, train, cn, wi = _fused_setup(seed=6)
        from ensemblekit.semi import FusedDataset

        small = FusedDataset(fused=train.fused[:5], pca=train.pca, source_order=train.source_order)
        with pytest.raises(BadSplit):
            fit_beta(small, ds.y[train_idx][:5], cn[:5], wi[:5], cfg=fast_cfg(epochs=1))
