from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from gwnn.datasets import (
    Dataset,
    label_rate,
    load_dataset,
    make_paper_split,
    write_dataset,
)
from gwnn.errors import DataError
from gwnn.graphs import load_graph

TOY_DIR = Path(__file__).parent / "data" / "toy"


def write_toy_variant(tmp_path, features=None, labels=None, splits=None,
                      edges=None):
    base = {p.name: (TOY_DIR / p.name).read_text() for p in TOY_DIR.iterdir()}
    for name, text in (("features.tsv", features), ("labels.tsv", labels),
                       ("splits.tsv", splits), ("edges.tsv", edges)):
        if text is not None:
            base[name] = text
    for name, text in base.items():
        (tmp_path / name).write_text(text)
    return tmp_path


class TestLoad:
    def test_toy_fixture(self):
        ds = load_dataset(TOY_DIR)
        assert ds.n == 10
        assert ds.p == 4
        assert ds.c == 2
        assert ds.graph.num_edges == 21
        assert ds.X.nnz == 20
        assert set(np.unique(ds.X.data)) == {1.0}
        assert ds.split_mode == "file"
        np.testing.assert_array_equal(ds.split["train"], [0, 1, 5, 6])

    def test_split_roles_disjoint_and_in_range(self):
        ds = load_dataset(TOY_DIR)
        all_ids = np.concatenate([ds.split[r] for r in ("train", "val", "test")])
        assert len(all_ids) == len(set(all_ids.tolist()))
        assert all_ids.min() >= 0 and all_ids.max() < ds.n

    def test_missing_directory(self):
        with pytest.raises(DataError, match="not found"):
            load_dataset("/nonexistent/place")

    def test_missing_file_named(self, tmp_path):
        write_toy_variant(tmp_path)
        (tmp_path / "labels.tsv").unlink()
        with pytest.raises(DataError, match="labels.tsv"):
            load_dataset(tmp_path)

    def test_splits_file_optional(self, tmp_path):
        # without splits.tsv the deterministic by-index protocol kicks in;
        # the toy graph is far too small for 20/500/1000, so only check the
        # error is the protocol's, not a file-handling one
        write_toy_variant(tmp_path)
        (tmp_path / "splits.tsv").unlink()
        with pytest.raises(DataError, match="needs >= 20"):
            load_dataset(tmp_path)

    def test_feature_node_count_mismatch(self, tmp_path):
        feats = "# n=11 p=4 nnz=1\n0\t0\t1\n"
        write_toy_variant(tmp_path, features=feats)
        with pytest.raises(DataError, match="n="):
            load_dataset(tmp_path)


class TestFeatureValidation:
    def test_nonbinary_value_rejected(self, tmp_path):
        feats = "# n=10 p=4 nnz=1\n0\t0\t0.5\n"
        write_toy_variant(tmp_path, features=feats)
        with pytest.raises(DataError, match=r"features\.tsv:2"):
            load_dataset(tmp_path)

    def test_nnz_header_mismatch(self, tmp_path):
        feats = "# n=10 p=4 nnz=3\n0\t0\t1\n0\t1\t1\n"
        write_toy_variant(tmp_path, features=feats)
        with pytest.raises(DataError, match="nnz"):
            load_dataset(tmp_path)

    def test_duplicate_entry_rejected(self, tmp_path):
        feats = "# n=10 p=4 nnz=2\n0\t0\t1\n0\t0\t1\n"
        write_toy_variant(tmp_path, features=feats)
        with pytest.raises(DataError, match="duplicate"):
            load_dataset(tmp_path)

    def test_column_out_of_range(self, tmp_path):
        feats = "# n=10 p=4 nnz=1\n0\t9\t1\n"
        write_toy_variant(tmp_path, features=feats)
        with pytest.raises(DataError):
            load_dataset(tmp_path)

    def test_malformed_line_location(self, tmp_path):
        feats = "# n=10 p=4 nnz=1\nnot\ttabbed\n"
        write_toy_variant(tmp_path, features=feats)
        with pytest.raises(DataError, match=r"features\.tsv:2"):
            load_dataset(tmp_path)


class TestLabelValidation:
    def test_every_node_needs_a_label(self, tmp_path):
        labels = "# c=2\n" + "".join(f"{i}\t0\n" for i in range(9))
        write_toy_variant(tmp_path, labels=labels)
        with pytest.raises(DataError, match="label"):
            load_dataset(tmp_path)

    def test_label_out_of_declared_range(self, tmp_path):
        labels = "# c=2\n" + "".join(f"{i}\t{0 if i else 5}\n" for i in range(10))
        write_toy_variant(tmp_path, labels=labels)
        with pytest.raises(DataError):
            load_dataset(tmp_path)

    def test_duplicate_node_rejected(self, tmp_path):
        labels = "# c=2\n0\t0\n0\t1\n" + "".join(f"{i}\t0\n" for i in range(1, 10))
        write_toy_variant(tmp_path, labels=labels)
        with pytest.raises(DataError):
            load_dataset(tmp_path)


class TestSplitValidation:
    def test_overlap_rejected(self, tmp_path):
        text = (TOY_DIR / "splits.tsv").read_text() + "0\tval\n"
        write_toy_variant(tmp_path, splits=text)
        with pytest.raises(DataError, match="0"):
            load_dataset(tmp_path)

    def test_unknown_role_rejected(self, tmp_path):
        text = (TOY_DIR / "splits.tsv").read_text() + "9\tholdout\n"
        write_toy_variant(tmp_path, splits=text)
        with pytest.raises(DataError, match="holdout"):
            load_dataset(tmp_path)

    def test_empty_role_rejected(self, tmp_path):
        text = "".join(
            line + "\n"
            for line in (TOY_DIR / "splits.tsv").read_text().splitlines()
            if not line.endswith("\tval")
        )
        write_toy_variant(tmp_path, splits=text)
        with pytest.raises(DataError, match="val"):
            load_dataset(tmp_path)


class TestRoundTrip:
    def test_toy_bytes_stable(self, tmp_path):
        ds = load_dataset(TOY_DIR)
        write_dataset(ds, tmp_path)
        for name in ("edges.tsv", "features.tsv", "labels.tsv", "splits.tsv"):
            assert (tmp_path / name).read_bytes() == (TOY_DIR / name).read_bytes(), name

    def test_synthetic_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        n, p, c = 60, 12, 3
        edges = [(i, (i + 1) % n) for i in range(n)]
        graph = load_graph(edges, n)
        X = sp.csr_array((rng.random((n, p)) < 0.2).astype(np.float64))
        labels = rng.integers(0, c, n)
        split = {
            "train": np.arange(0, 20, dtype=np.int64),
            "val": np.arange(20, 40, dtype=np.int64),
            "test": np.arange(40, 60, dtype=np.int64),
        }
        ds = Dataset(graph=graph, X=X, labels=labels, c=c, split=split,
                     split_mode="file")
        d1 = tmp_path / "a"
        d2 = tmp_path / "b"
        write_dataset(ds, d1)
        write_dataset(load_dataset(d1), d2)
        for name in ("edges.tsv", "features.tsv", "labels.tsv", "splits.tsv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name


class TestPaperSplit:
    def labels(self, n=2708, c=7):
        return np.arange(n) % c

    def test_sizes_and_determinism(self):
        labels = self.labels()
        s1 = make_paper_split(labels)
        s2 = make_paper_split(labels)
        assert s1["train"].size == 140
        assert s1["val"].size == 500
        assert s1["test"].size == 1000
        for role in ("train", "val", "test"):
            np.testing.assert_array_equal(s1[role], s2[role])

    def test_by_index_takes_lowest_ids(self):
        # with labels cycling 0..6 the first 140 nodes are exactly 20 per class
        s = make_paper_split(self.labels())
        np.testing.assert_array_equal(s["train"], np.arange(140))
        np.testing.assert_array_equal(s["val"], np.arange(140, 640))

    def test_per_class_counts(self):
        s = make_paper_split(self.labels())
        _, counts = np.unique(self.labels()[s["train"]], return_counts=True)
        assert (counts == 20).all()

    def test_seeded_variant_differs_but_is_reproducible(self):
        labels = self.labels()
        a = make_paper_split(labels, seed=1)
        b = make_paper_split(labels, seed=1)
        c = make_paper_split(labels, seed=2)
        np.testing.assert_array_equal(a["train"], b["train"])
        assert not np.array_equal(a["train"], c["train"])
        _, counts = np.unique(labels[a["train"]], return_counts=True)
        assert (counts == 20).all()

    def test_roles_disjoint(self):
        s = make_paper_split(self.labels(), seed=5)
        ids = np.concatenate([s["train"], s["val"], s["test"]])
        assert len(ids) == len(set(ids.tolist()))

    def test_small_class_rejected(self):
        labels = np.array([0] * 100 + [1] * 5)
        with pytest.raises(DataError, match="class 1"):
            make_paper_split(labels)

    def test_too_few_remaining_rejected(self):
        labels = (np.arange(200) % 2)
        with pytest.raises(DataError):
            make_paper_split(labels, per_class=20, val_size=100, test_size=100)

    def test_custom_sizes(self):
        s = make_paper_split(self.labels(100, 2), per_class=5, val_size=10,
                             test_size=20)
        assert s["train"].size == 10
        assert s["val"].size == 10
        assert s["test"].size == 20


class TestLabelRate:
    def test_protocol_rate(self):
        labels = np.arange(2708) % 7
        ds = Dataset(
            graph=load_graph([(0, 1)], 2708), X=sp.csr_array((2708, 1)),
            labels=labels, c=7, split=make_paper_split(labels),
            split_mode="by_index",
        )
        assert label_rate(ds) == pytest.approx(140 / 2708)

    def test_toy_rate(self):
        assert label_rate(load_dataset(TOY_DIR)) == pytest.approx(0.4)
