#!/usr/bin/env python3
"""Convert pickled Planetoid-format citation datasets to the TSV layout.

The input directory must hold the eight upstream files for one dataset:

  ind.<name>.x           csr matrix, features of the labelled training nodes
  ind.<name>.y           one-hot label rows aligned with x
  ind.<name>.allx        csr matrix, features of every non-test node
  ind.<name>.ally        one-hot label rows aligned with allx
  ind.<name>.tx          csr matrix, features of the listed test nodes
  ind.<name>.ty          one-hot label rows aligned with tx
  ind.<name>.graph       dict mapping node index to a neighbour list
  ind.<name>.test.index  text file, one test node index per line

Node numbering in the upstream files: indices below allx.shape[0] are the
non-test block (the first y.shape[0] of them are the labelled training
nodes), and the tail block holds the test nodes at the positions named by
test.index.  Row i of tx/ty belongs to the i-th line of test.index, which
lists indices in arbitrary order.

The output directory gets the four-file dataset layout (edges.tsv,
features.tsv, labels.tsv, splits.tsv) written through the gwnn canonical
writer, so converting the same input twice yields byte-identical files.
Features are binarized (any nonzero entry becomes 1), duplicate and
reversed edges are collapsed and self-loops dropped, and the split is the
canonical one: the labelled training block, the next 500 nodes for
validation, and the listed test nodes.

citeseer names a few tail indices in no line of test.index.  Those nodes
keep an all-zero feature row, get label 0, join no split, and are counted
in the isolated-node report; no artificial edges are invented for them.
Downstream Laplacian construction must opt in via allow_isolated.

A sha256 checksum line is printed for every file written.  Any missing or
unreadable input file aborts with a nonzero exit status and the file name
on stderr.  The conversion is single-threaded.
"""

from __future__ import annotations

import argparse
import hashlib
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from gwnn import Dataset, load_dataset, load_graph, write_dataset
from gwnn.errors import DataError

__all__ = ["ConvertError", "convert", "main"]

DATASET_NAMES = ("cora", "citeseer", "pubmed")
VAL_SIZE = 500

INPUT_SUFFIXES = ("x", "y", "allx", "ally", "tx", "ty", "graph", "test.index")


class ConvertError(Exception):
    """Unusable input; the message names the offending file."""


class _LegacyUnpickler(pickle.Unpickler):
    """Unpickler that maps historical scipy/numpy module paths.

    The upstream pickles predate the scipy.sparse._csr / numpy._core
    renames; when the recorded path no longer resolves, retry against the
    current private module of the same name.
    """

    def find_class(self, module, name):
        try:
            return super().find_class(module, name)
        except (ImportError, AttributeError):
            if module.startswith("scipy.sparse."):
                tail = module.split(".")[2]
                return super().find_class(f"scipy.sparse._{tail}", name)
            if module.startswith("numpy.core"):
                return super().find_class(
                    module.replace("numpy.core", "numpy._core", 1), name
                )
            raise


def _load_pickle(path: Path):
    if not path.is_file():
        raise ConvertError(f"missing input file: {path}")
    try:
        with open(path, "rb") as fh:
            return _LegacyUnpickler(fh, encoding="latin1").load()
    except Exception as exc:
        raise ConvertError(f"corrupt input file: {path} ({exc})") from exc


def _read_test_index(path: Path) -> np.ndarray:
    if not path.is_file():
        raise ConvertError(f"missing input file: {path}")
    indices = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    indices.append(int(line))
    except (OSError, UnicodeDecodeError, ValueError) as exc:
        raise ConvertError(f"corrupt input file: {path} ({exc})") from exc
    if not indices:
        raise ConvertError(f"corrupt input file: {path} (no test indices)")
    idx = np.asarray(indices, dtype=np.int64)
    if np.unique(idx).size != idx.size:
        raise ConvertError(f"corrupt input file: {path} (duplicate test indices)")
    return idx


def _as_csr(obj, path: Path) -> sp.csr_array:
    try:
        mat = sp.csr_array(obj)
    except Exception as exc:
        raise ConvertError(f"corrupt input file: {path} (not a matrix: {exc})") from exc
    if mat.ndim != 2:
        raise ConvertError(f"corrupt input file: {path} (expected a 2-d matrix)")
    return mat.astype(np.float64)


def _as_onehot(obj, path: Path) -> np.ndarray:
    arr = np.asarray(obj)
    if arr.ndim != 2:
        raise ConvertError(f"corrupt input file: {path} (expected one-hot rows)")
    return arr


def convert(input_dir, name: str, out_dir) -> dict:
    """Convert one dataset and return a summary report dict.

    Raises ConvertError on any unusable input.  The report carries the
    counts that were printed plus a file -> sha256 mapping.
    """
    if name not in DATASET_NAMES:
        raise ConvertError(f"unknown dataset name: {name!r}")
    src = Path(input_dir)
    if not src.is_dir():
        raise ConvertError(f"input directory not found: {src}")
    paths = {suf: src / f"ind.{name}.{suf}" for suf in INPUT_SUFFIXES}

    x = _as_csr(_load_pickle(paths["x"]), paths["x"])
    y = _as_onehot(_load_pickle(paths["y"]), paths["y"])
    allx = _as_csr(_load_pickle(paths["allx"]), paths["allx"])
    ally = _as_onehot(_load_pickle(paths["ally"]), paths["ally"])
    tx = _as_csr(_load_pickle(paths["tx"]), paths["tx"])
    ty = _as_onehot(_load_pickle(paths["ty"]), paths["ty"])
    graph = _load_pickle(paths["graph"])
    test_idx = _read_test_index(paths["test.index"])

    if not isinstance(graph, dict):
        raise ConvertError(
            f"corrupt input file: {paths['graph']} (expected an adjacency dict)"
        )
    if x.shape[0] != y.shape[0]:
        raise ConvertError(
            f"corrupt input file: {paths['y']} "
            f"({y.shape[0]} label rows for {x.shape[0]} feature rows)"
        )
    if allx.shape[0] != ally.shape[0]:
        raise ConvertError(
            f"corrupt input file: {paths['ally']} "
            f"({ally.shape[0]} label rows for {allx.shape[0]} feature rows)"
        )
    if tx.shape[0] != ty.shape[0]:
        raise ConvertError(
            f"corrupt input file: {paths['ty']} "
            f"({ty.shape[0]} label rows for {tx.shape[0]} feature rows)"
        )
    if tx.shape[0] != test_idx.size:
        raise ConvertError(
            f"corrupt input file: {paths['tx']} "
            f"({tx.shape[0]} rows for {test_idx.size} test indices)"
        )
    p = allx.shape[1]
    if x.shape[1] != p or tx.shape[1] != p:
        raise ConvertError(
            f"corrupt input file: {paths['tx']} (feature width differs from allx)"
        )
    c = ally.shape[1]
    if y.shape[1] != c or ty.shape[1] != c:
        raise ConvertError(
            f"corrupt input file: {paths['ty']} (label width differs from ally)"
        )

    n_front = allx.shape[0]
    n_train = y.shape[0]
    # Test nodes live in the tail block after allx; the tail runs to the
    # largest listed index, and unlisted positions inside it are the
    # padded isolated nodes (citeseer).
    if int(test_idx.min()) < n_front:
        raise ConvertError(
            f"corrupt input file: {paths['test.index']} "
            f"(test index {int(test_idx.min())} falls inside the non-test block)"
        )
    n = int(test_idx.max()) + 1
    tail = n - n_front
    if n_train + VAL_SIZE > n_front:
        raise ConvertError(
            f"corrupt input file: {paths['allx']} "
            f"({n_front} non-test nodes cannot hold {n_train} train + {VAL_SIZE} val)"
        )

    # Row i of tx/ty belongs to node test_idx[i]; unlisted tail positions
    # stay all-zero in both features and one-hot labels.
    place = test_idx - n_front
    coo = tx.tocoo()
    tx_ext = sp.csr_array(
        (coo.data, (place[coo.row], coo.col)), shape=(tail, p)
    )
    ty_ext = np.zeros((tail, c), dtype=ally.dtype)
    ty_ext[place] = ty

    X = sp.csr_array(sp.vstack([allx, tx_ext], format="csr"))
    X.eliminate_zeros()
    X.data[:] = 1.0  # binarize: any nonzero entry becomes 1
    X.sort_indices()

    onehot = np.vstack([ally, ty_ext])
    labels = np.argmax(onehot, axis=1).astype(np.int64)  # all-zero rows -> 0

    try:
        edge_list = [
            (int(u), int(v))
            for u, nbrs in sorted(graph.items())
            for v in nbrs
        ]
        g = load_graph(edge_list, n)
    except (DataError, TypeError, ValueError) as exc:
        raise ConvertError(f"corrupt input file: {paths['graph']} ({exc})") from exc

    degrees = np.asarray(np.abs(g.adjacency).sum(axis=1)).ravel()
    isolated = np.flatnonzero(degrees == 0)

    split = {
        "train": np.arange(n_train, dtype=np.int64),
        "val": np.arange(n_train, n_train + VAL_SIZE, dtype=np.int64),
        "test": np.sort(test_idx),
    }
    dataset = Dataset(
        graph=g, X=X, labels=labels, c=c, split=split, split_mode="file"
    )

    out = Path(out_dir)
    write_dataset(dataset, out)
    try:
        load_dataset(out)  # self-check: output must pass ingest validation
    except DataError as exc:
        raise ConvertError(f"converted output failed validation: {exc}") from exc

    checksums = {}
    for fname in ("edges.tsv", "features.tsv", "labels.tsv", "splits.tsv"):
        checksums[fname] = hashlib.sha256((out / fname).read_bytes()).hexdigest()

    return {
        "name": name,
        "out_dir": out,
        "n": n,
        "edges": int(g.edges.shape[0]),
        "p": p,
        "c": c,
        "train": int(split["train"].size),
        "val": int(split["val"].size),
        "test": int(split["test"].size),
        "isolated": isolated,
        "checksums": checksums,
    }


def _print_report(report: dict) -> None:
    for key in ("name", "n", "edges", "p", "c", "train", "val", "test"):
        print(f"{key}={report[key]}")
    isolated = report["isolated"]
    print(f"isolated_nodes={isolated.size}")
    if isolated.size:
        shown = ", ".join(str(i) for i in isolated[:10])
        more = "" if isolated.size <= 10 else f" (+{isolated.size - 10} more)"
        print(
            f"warning: {isolated.size} degree-0 node(s) kept without "
            f"artificial edges: {shown}{more}",
            file=sys.stderr,
        )
    for fname, digest in sorted(report["checksums"].items()):
        print(f"{fname}  sha256={digest}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convert.py",
        description="Convert a pickled Planetoid-format citation dataset "
        "to the four-file TSV dataset layout.",
    )
    parser.add_argument(
        "--input", required=True, help="directory holding the ind.<name>.* files"
    )
    parser.add_argument(
        "--name", required=True, choices=DATASET_NAMES, help="dataset name"
    )
    parser.add_argument(
        "--out", required=True, help="output dataset directory (created if needed)"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = convert(args.input, args.name, args.out)
    except ConvertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    _print_report(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
