import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemblekit import errors
from ensemblekit.data import (
    EmbeddingSet,
    LabelTable,
    align,
    load_embeddings,
    load_labels,
    make_splits,
    write_embeddings,
    write_labels,
)
from ensemblekit.synth import SourceSpec, SyntheticSpec, gen_synthetic

from conftest import joint_spec, perceptron_separable


def _emb(source_id, vectors, ids=None):
    vectors = np.asarray(vectors, dtype=np.float32)
    if ids is None:
        ids = [f"s{i}" for i in range(len(vectors))]
    return EmbeddingSet(source_id=source_id, vectors=vectors, sample_ids=ids)


class TestEmbFile:
    def test_round_trip_values(self, tmp_path):
        path = tmp_path / "a.emb"
        emb = _emb("a", [[1, 0, 0], [0, 1, 0]])
        write_embeddings(emb, path)
        back = load_embeddings(path, sample_ids=emb.sample_ids)
        assert back.n == 2 and back.dim == 3
        np.testing.assert_array_equal(back.vectors, emb.vectors)

    def test_round_trip_bytes(self, tmp_path):
        p1, p2 = tmp_path / "a.emb", tmp_path / "b.emb"
        emb = _emb("a", np.random.default_rng(0).normal(size=(7, 5)))
        write_embeddings(emb, p1)
        write_embeddings(load_embeddings(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.emb"
        path.write_bytes(b"XXXX" + bytes(16))
        with pytest.raises(errors.BadMagic):
            load_embeddings(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "x.emb"
        header = struct.pack("<4sBBHQI", b"EMBV", 1, 0, 0, 5, 3)
        path.write_bytes(header + bytes(4 * 3 * 4))  # 4 rows instead of 5
        with pytest.raises(errors.Truncated):
            load_embeddings(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "x.emb"
        emb = _emb("a", [[1.0, 2.0]])
        write_embeddings(emb, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(errors.Truncated):
            load_embeddings(path)

    def test_unsupported_dtype(self, tmp_path):
        path = tmp_path / "x.emb"
        path.write_bytes(struct.pack("<4sBBHQI", b"EMBV", 1, 7, 0, 0, 3))
        with pytest.raises(errors.UnsupportedDtype):
            load_embeddings(path)

    def test_non_finite_reports_position(self, tmp_path):
        path = tmp_path / "x.emb"
        vec = np.zeros((3, 4), dtype="<f4")
        vec[2, 1] = np.nan
        header = struct.pack("<4sBBHQI", b"EMBV", 1, 0, 0, 3, 4)
        path.write_bytes(header + vec.tobytes())
        with pytest.raises(errors.NonFiniteValue) as exc:
            load_embeddings(path)
        assert exc.value.row == 2 and exc.value.col == 1


class TestLabels:
    def _write(self, tmp_path, rows):
        path = tmp_path / "l.tsv"
        path.write_text("id\tlabel\n" + "".join(f"{i}\t{l}\n" for i, l in rows))
        return path

    def test_basic(self, tmp_path):
        t = load_labels(self._write(tmp_path, [("a", 0), ("b", 1), ("c", 1)]))
        assert t.num_classes == 2
        assert len(t.entries) == 3

    def test_c_is_max_plus_one(self, tmp_path):
        t = load_labels(self._write(tmp_path, [("a", 0), ("b", 2)]))
        assert t.num_classes == 3

    def test_duplicate_id(self, tmp_path):
        with pytest.raises(errors.DuplicateId):
            load_labels(self._write(tmp_path, [("a", 0), ("a", 1)]))

    def test_non_integer_label(self, tmp_path):
        with pytest.raises(errors.BadLabel):
            load_labels(self._write(tmp_path, [("a", "x")]))

    def test_negative_label(self, tmp_path):
        with pytest.raises(errors.BadLabel):
            load_labels(self._write(tmp_path, [("a", -1)]))

    def test_round_trip(self, tmp_path):
        t = LabelTable(entries=[("a", 0), ("b", 1)], num_classes=2)
        path = tmp_path / "out.tsv"
        write_labels(t, path)
        assert load_labels(path).entries == t.entries


class TestAlign:
    def test_reorders_to_label_order(self):
        labels = LabelTable(entries=[("a", 0), ("b", 1)], num_classes=2)
        s1 = _emb("s1", [[1.0], [2.0]], ids=["a", "b"])
        s2 = _emb("s2", [[20.0], [10.0]], ids=["b", "a"])
        ds = align([s1, s2], labels)
        assert ds.sources["s2"].sample_ids == ["a", "b"]
        np.testing.assert_array_equal(ds.sources["s2"].vectors.ravel(), [10.0, 20.0])

    def test_missing_sample(self):
        labels = LabelTable(entries=[("a", 0), ("b", 1)], num_classes=2)
        with pytest.raises(errors.MissingSample):
            align([_emb("s1", [[1.0]], ids=["a"])], labels)

    def test_extra_sample(self):
        labels = LabelTable(entries=[("a", 0)], num_classes=2)
        with pytest.raises(errors.ExtraSample):
            align([_emb("s1", [[1.0], [2.0]], ids=["a", "z"])], labels)

    def test_identity_and_idempotence(self):
        labels = LabelTable(entries=[("a", 0), ("b", 1)], num_classes=2)
        s = _emb("s", [[1.0], [2.0]], ids=["a", "b"])
        once = align([s], labels)
        twice = align(list(once.sources.values()), once.labels)
        assert once.m == 2
        np.testing.assert_array_equal(
            once.sources["s"].vectors, twice.sources["s"].vectors
        )


class TestSplits:
    def test_counts(self):
        (plan,) = make_splits(10, [0.2], 42)
        assert len(plan.test_indices) == 2 and len(plan.train_indices) == 8

    def test_paper_partitions(self):
        plans = make_splits(100, [0.10, 0.15, 0.20, 0.25, 0.30], 42)
        assert [len(p.test_indices) for p in plans] == [10, 15, 20, 25, 30]

    def test_deterministic(self):
        a = make_splits(50, [0.3], 7)
        b = make_splits(50, [0.3], 7)
        assert a[0].train_indices == b[0].train_indices
        assert a[0].test_indices == b[0].test_indices

    def test_degenerate_fraction(self):
        with pytest.raises(errors.BadSplit):
            make_splits(3, [0.01], 0)

    @settings(max_examples=60, deadline=None)
    @given(
        m=st.integers(min_value=2, max_value=200),
        frac=st.floats(min_value=0.1, max_value=0.5),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_partition_property(self, m, frac, seed):
        n_test = int(np.floor(frac * m + 0.5))
        if n_test in (0, m):
            return
        (plan,) = make_splits(m, [frac], seed)
        merged = sorted(plan.train_indices + plan.test_indices)
        assert merged == list(range(m))
        assert len(plan.test_indices) == n_test


class TestSynthetic:
    def test_deterministic(self):
        spec = joint_spec(n=40, dim=4, seed=5)
        a, b = gen_synthetic(spec, seed=5), gen_synthetic(spec, seed=5)
        for sid in a.sources:
            np.testing.assert_array_equal(a.sources[sid].vectors, b.sources[sid].vectors)
        assert a.labels.entries == b.labels.entries

    def test_joint_signal_structure(self):
        # Oracle: concatenation is linearly separable, single sources near chance.
        ds = gen_synthetic(joint_spec(n=300, dim=8, seed=2), seed=2)
        y = ds.y
        xa = ds.sources["base"].vectors
        xb = ds.sources["large"].vectors
        assert perceptron_separable(np.hstack([xa, xb]), y)
        from sklearn.linear_model import LogisticRegression

        for x in (xa, xb):
            probe = LogisticRegression(max_iter=500).fit(x, y)
            assert probe.score(x, y) <= 0.7

    def test_chance_spec(self):
        spec = SyntheticSpec(n=200, classes=4, sources=[SourceSpec("x", 6, "noise")], seed=0)
        ds = gen_synthetic(spec, seed=0)
        from sklearn.linear_model import LogisticRegression

        probe = LogisticRegression(max_iter=500).fit(
            ds.sources["x"].vectors[:150], ds.y[:150]
        )
        acc = probe.score(ds.sources["x"].vectors[150:], ds.y[150:])
        assert abs(acc - 0.25) < 0.2

    def test_degenerate_specs(self):
        with pytest.raises(ValueError):
            gen_synthetic(SyntheticSpec(n=0, classes=2, sources=[SourceSpec("x", 3, "noise")]))
        with pytest.raises(ValueError):
            gen_synthetic(SyntheticSpec(n=5, classes=2, sources=[SourceSpec("x", 0, "noise")]))

    def test_kg_correlated_sign(self):
        ds = gen_synthetic(joint_spec(n=100, dim=8, seed=3, label_noise=0.2, kg=True), seed=3)
        fused = np.hstack(
            [ds.sources["base"].vectors, ds.sources["large"].vectors]
        ).astype(np.float64)
        kg = ds.sources["cnet"].vectors[:, : fused.shape[1]].astype(np.float64)
        cos = np.einsum("ij,ij->i", fused, kg) / (
            np.linalg.norm(fused, axis=1) * np.linalg.norm(kg, axis=1)
        )
        # Bimodal at +-1: high similarity exactly for clean labels.
        assert ((cos > 0.99) | (cos < -0.99)).all()
        assert 0.1 < np.mean(cos < 0) < 0.3
