"""Command-line front end.

Subcommands: basis, train, sweep, analyze (top-bases | locality | support),
bench. Every option resolves with precedence CLI flag > GWNN_<NAME> env
var > --config file line > built-in default, every command ends with
machine-parseable ``key=value`` lines, and all randomness flows from the
resolved --seed.

Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import bench as bench_mod
from . import chebyshev
from .analysis import sparsity_report, top_active_bases
from .datasets import load_dataset
from .errors import DataError, NumericalError
from .graphs import normalized_laplacian
from .locality import convolution_support, locality_profile
from .model import (
    GwnnModel,
    ModelConfig,
    TrainConfig,
    evaluate,
    save_checkpoint,
    train,
    write_history_csv,
)
from .spectral import (
    eigendecompose,
    load_basis,
    save_basis,
    wavelet_basis_exact,
)

ENV_PREFIX = "GWNN_"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Opt:
    dest: str
    typ: type
    default: object
    help: str = ""
    choices: tuple | None = None


def _flag(dest: str) -> str:
    return "--" + dest.replace("_", "-")


def _add_opts(parser: argparse.ArgumentParser, opts: list[Opt]) -> None:
    for o in opts:
        if o.typ is bool:
            parser.add_argument(_flag(o.dest), dest=o.dest, action="store_const",
                                const=True, default=None, help=o.help)
        else:
            parser.add_argument(_flag(o.dest), dest=o.dest, type=o.typ,
                                default=None, help=o.help,
                                choices=o.choices)


def _parse_bool(raw: str, source: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"{source}: cannot parse {raw!r} as a boolean")


def _read_config(path: str) -> dict:
    """key = value lines, # comments; values stay strings until resolution."""
    out = {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    with open(p, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{p}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(ns: argparse.Namespace, opts: list[Opt]) -> dict:
    config = _read_config(ns.config) if getattr(ns, "config", None) else {}
    known = {o.dest for o in opts}
    for key in config:
        if key not in known:
            print(f"gwnn: warning: config key {key!r} unused by this command",
                  file=sys.stderr)
    resolved = {}
    for o in opts:
        value = getattr(ns, o.dest)
        source = "flag"
        if value is None:
            env_name = ENV_PREFIX + o.dest.upper()
            if env_name in os.environ:
                value, source = os.environ[env_name], f"env {env_name}"
            elif o.dest in config:
                value, source = config[o.dest], f"config {o.dest}"
        if value is None:
            resolved[o.dest] = o.default
            continue
        if isinstance(value, str) and o.typ is not str:
            if o.typ is bool:
                value = _parse_bool(value, source)
            else:
                try:
                    value = o.typ(value)
                except ValueError as exc:
                    raise UsageError(f"{source}: {exc}") from exc
        if o.choices is not None and value not in o.choices:
            raise UsageError(
                f"{source}: {value!r} not one of {list(o.choices)}"
            )
        resolved[o.dest] = value
    return resolved


def _require(resolved: dict, dest: str):
    if resolved.get(dest) is None:
        raise UsageError(f"missing required option {_flag(dest)}")
    return resolved[dest]


def _cap_threads(k):
    if k is None:
        return None
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        print("gwnn: warning: threadpoolctl not installed; --threads ignored",
              file=sys.stderr)
        return None
    return threadpool_limits(limits=int(k))


def _emit(pairs: list[tuple[str, object]]) -> None:
    for key, value in pairs:
        print(f"{key}={value}")


# -- shared option groups ------------------------------------------------

COMMON = [
    Opt("config", str, None, "key=value config file"),
    Opt("seed", int, 0, "seed for all randomness"),
    Opt("threads", int, None, "cap BLAS/OpenMP worker threads"),
]

DATA = [
    Opt("data", str, None, "dataset directory (edges/features/labels[/splits] .tsv)"),
    Opt("allow_isolated", bool, False, "admit degree-0 nodes in the Laplacian"),
]

BUILD = [
    Opt("s", float, 1.0, "wavelet scale"),
    Opt("t", float, 1e-4, "sparsity threshold"),
    Opt("m", int, 30, "polynomial truncation order"),
    Opt("method", str, "cheb", "basis construction path", ("exact", "cheb")),
    Opt("lambda_max", str, "analytic",
        "spectral upper bound: analytic 2.0 or power iteration",
        ("analytic", "power")),
    Opt("swap_kernel", bool, False, "swap the roles of the kernel pair"),
]

TRAIN = [
    Opt("basis", str, None, "basis cache file (skips on-the-fly build)"),
    Opt("hidden", int, 16, "hidden units"),
    Opt("lr", float, 0.01, "Adam learning rate"),
    Opt("dropout", float, 0.5, "dropout rate on layer inputs"),
    Opt("patience", int, 100, "early-stopping patience in epochs"),
    Opt("epochs", int, 2000, "maximum training epochs"),
    Opt("weight_decay", float, 0.0, "L2 penalty on the first-layer weights"),
]


def _build_basis(resolved: dict, lap, eigensystem=None):
    s, t = resolved["s"], resolved["t"]
    if resolved["method"] == "exact":
        es = eigensystem if eigensystem is not None else eigendecompose(lap)
        return wavelet_basis_exact(es, s, t, swap_kernel=resolved["swap_kernel"]), es
    lmax = None
    if resolved["lambda_max"] == "power":
        lmax = chebyshev.estimate_lambda_max(lap, seed=resolved["seed"])
    basis = chebyshev.materialize_basis(
        lap, s, t, order=resolved["m"], lambda_max=lmax,
        swap_kernel=resolved["swap_kernel"],
    )
    return basis, eigensystem


def _dataset_and_basis(resolved: dict):
    dataset = load_dataset(_require(resolved, "data"))
    lap = normalized_laplacian(dataset.graph,
                               allow_isolated=resolved["allow_isolated"])
    if resolved.get("basis"):
        basis_path = Path(resolved["basis"])
        if not basis_path.is_file():
            raise DataError(f"basis cache not found: {basis_path}")
        return dataset, load_basis(basis_path), None
    basis, es = _build_basis(resolved, lap)
    return dataset, basis, es


# -- commands ------------------------------------------------------------


def cmd_basis(ns: argparse.Namespace) -> int:
    opts = COMMON + DATA + BUILD + [Opt("out", str, None, "basis cache path")]
    resolved = _resolve(ns, opts)
    _cap_threads(resolved["threads"])
    out = _require(resolved, "out")
    dataset = load_dataset(_require(resolved, "data"))
    lap = normalized_laplacian(dataset.graph,
                               allow_isolated=resolved["allow_isolated"])
    basis, es = _build_basis(resolved, lap)
    save_basis(basis, out)
    report = sparsity_report(dataset.graph, basis, eigensystem=es,
                             allow_isolated=resolved["allow_isolated"])
    print(report.to_text(), end="")
    stats = {name: (density, nnz) for name, density, nnz in report.rows}
    _emit([
        ("psi_density", f"{stats['psi'][0]:.8g}"),
        ("psi_inv_density", f"{stats['psi_inv'][0]:.8g}"),
        ("psi_inv_nnz", stats["psi_inv"][1]),
        ("basis_file", out),
    ])
    return 0


def cmd_train(ns: argparse.Namespace) -> int:
    opts = (COMMON + DATA + BUILD + TRAIN +
            [Opt("out", str, None, "checkpoint path"),
             Opt("history", str, None, "training history CSV path")])
    resolved = _resolve(ns, opts)
    _cap_threads(resolved["threads"])
    dataset, basis, _ = _dataset_and_basis(resolved)
    cfg = ModelConfig(
        n=dataset.n, p=dataset.p, c=dataset.c, hidden=resolved["hidden"],
        s=basis.s, t=basis.t, dropout_rate=resolved["dropout"],
        seed=resolved["seed"],
    )
    tcfg = TrainConfig(
        lr=resolved["lr"], max_epochs=resolved["epochs"],
        patience=resolved["patience"], weight_decay=resolved["weight_decay"],
    )
    model = GwnnModel(cfg)
    model, history = train(model, basis, dataset, tcfg)
    best_epoch = min(history, key=lambda r: r["val_loss"])["epoch"]
    if resolved["history"]:
        write_history_csv(history, resolved["history"])
    if resolved["out"]:
        save_checkpoint(
            model, resolved["out"], basis=basis, best_epoch=best_epoch,
            extra={"lr": tcfg.lr, "patience": tcfg.patience,
                   "max_epochs": tcfg.max_epochs,
                   "weight_decay": tcfg.weight_decay},
        )
    val_acc = evaluate(model, basis, dataset, "val")
    test_acc = evaluate(model, basis, dataset, "test")
    _emit([
        ("epochs_run", len(history)),
        ("best_epoch", best_epoch),
        ("val_accuracy", f"{val_acc:.6f}"),
        ("test_accuracy", f"{test_acc:.6f}"),
    ])
    return 0


def cmd_sweep(ns: argparse.Namespace) -> int:
    opts = (COMMON + DATA + BUILD + TRAIN +
            [Opt("s_grid", str, "0.25,0.5,0.75,1.0,1.25,1.5", "comma list of s"),
             Opt("t_grid", str, "1e-4", "comma list of t"),
             Opt("seed_mode", str, "fixed", "seed handling across grid points",
                 ("fixed", "per-point")),
             Opt("out", str, None, "TSV output path (default stdout)")])
    resolved = _resolve(ns, opts)
    _cap_threads(resolved["threads"])
    try:
        s_grid = [float(v) for v in resolved["s_grid"].split(",") if v.strip()]
        t_grid = [float(v) for v in resolved["t_grid"].split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad grid: {exc}") from exc
    if not s_grid or not t_grid:
        raise UsageError("empty sweep grid")
    dataset = load_dataset(_require(resolved, "data"))
    lap = normalized_laplacian(dataset.graph,
                               allow_isolated=resolved["allow_isolated"])
    es = eigendecompose(lap) if resolved["method"] == "exact" else None

    rows = []
    point = 0
    for s in s_grid:
        for t in t_grid:
            seed = resolved["seed"]
            if resolved["seed_mode"] == "per-point":
                seed += point
            local = dict(resolved, s=s, t=t, seed=seed)
            basis, _ = _build_basis(local, lap, eigensystem=es)
            cfg = ModelConfig(
                n=dataset.n, p=dataset.p, c=dataset.c,
                hidden=resolved["hidden"], s=s, t=t,
                dropout_rate=resolved["dropout"], seed=seed,
            )
            tcfg = TrainConfig(
                lr=resolved["lr"], max_epochs=resolved["epochs"],
                patience=resolved["patience"],
                weight_decay=resolved["weight_decay"],
            )
            model, _history = train(GwnnModel(cfg), basis, dataset, tcfg)
            rows.append({
                "s": s, "t": t,
                "val_accuracy": evaluate(model, basis, dataset, "val"),
                "test_accuracy": evaluate(model, basis, dataset, "test"),
            })
            point += 1

    lines = ["s\tt\tval_accuracy\ttest_accuracy"]
    for r in rows:
        lines.append(f"{r['s']}\t{r['t']}\t{r['val_accuracy']:.6f}"
                     f"\t{r['test_accuracy']:.6f}")
    tsv = "\n".join(lines) + "\n"
    if resolved["out"]:
        Path(resolved["out"]).write_text(tsv, encoding="utf-8")
    else:
        print(tsv, end="")
    best = max(rows, key=lambda r: r["val_accuracy"])
    _emit([
        ("points", len(rows)),
        ("best_s", best["s"]),
        ("best_t", best["t"]),
        ("best_val_accuracy", f"{best['val_accuracy']:.6f}"),
    ])
    return 0


def cmd_analyze_top_bases(ns: argparse.Namespace) -> int:
    opts = (COMMON + DATA + BUILD +
            [Opt("basis", str, None, "basis cache file"),
             Opt("feature", int, None, "feature column index"),
             Opt("k", int, 10, "how many bases")])
    resolved = _resolve(ns, opts)
    _cap_threads(resolved["threads"])
    feature = _require(resolved, "feature")
    dataset, basis, _ = _dataset_and_basis(resolved)
    top = top_active_bases(basis, dataset.X, feature, resolved["k"])
    print("node\tvalue\tlabel")
    for node, value in top:
        print(f"{node}\t{value!r}\t{dataset.labels[node]}")
    labels = [int(dataset.labels[node]) for node, _ in top]
    majority = max(set(labels), key=labels.count)
    _emit([
        ("feature", feature),
        ("k", len(top)),
        ("majority_label", majority),
        ("majority_count", labels.count(majority)),
    ])
    return 0


def cmd_analyze_locality(ns: argparse.Namespace) -> int:
    opts = (COMMON + DATA + BUILD +
            [Opt("basis", str, None, "basis cache file"),
             Opt("node", int, None, "target node")])
    resolved = _resolve(ns, opts)
    _cap_threads(resolved["threads"])
    node = _require(resolved, "node")
    dataset, basis, _ = _dataset_and_basis(resolved)
    profile = locality_profile(dataset.graph, basis, node)
    print(profile.to_tsv(), end="")
    _emit([
        ("node", node),
        ("hops", profile.hop_mass.shape[0]),
        ("unreachable_mass", f"{profile.unreachable_mass:.6g}"),
    ])
    return 0


def cmd_analyze_support(ns: argparse.Namespace) -> int:
    opts = (COMMON + DATA + BUILD +
            [Opt("basis", str, None, "basis cache file"),
             Opt("row", int, None, "dump one row of H as TSV")])
    resolved = _resolve(ns, opts)
    _cap_threads(resolved["threads"])
    dataset, basis, _ = _dataset_and_basis(resolved)
    H = convolution_support(basis)
    n = H.shape[0]
    off = H - sp.eye_array(n, format="csr")
    max_dev = float(np.abs(off).max()) if n else 0.0
    if max_dev < 1e-9:
        print("warning: H is the identity (exact unthresholded pair)",
              file=sys.stderr)
    if resolved["row"] is not None:
        r = resolved["row"]
        if not 0 <= r < n:
            raise UsageError(f"--row {r} out of range [0, {n})")
        row = H[[r], :].tocoo()
        print("col\tvalue")
        for j, v in sorted(zip(row.coords[1], row.data)):
            print(f"{j}\t{float(v)!r}")
    _emit([
        ("h_nnz", int(H.nnz)),
        ("h_density", f"{H.nnz / (n * n):.8g}"),
        ("h_max_offidentity", f"{max_dev:.6g}"),
    ])
    return 0


def cmd_bench(ns: argparse.Namespace) -> int:
    opts = (COMMON +
            [Opt("edges", str, "1000,10000,100000", "comma list of edge counts"),
             Opt("m", int, 30, "polynomial truncation order"),
             Opt("s", float, 1.0, "wavelet scale"),
             Opt("full", bool, False,
                 "also time exact vs cheb materialization and order ratio")])
    resolved = _resolve(ns, opts)
    _cap_threads(resolved["threads"])
    try:
        targets = [int(v) for v in resolved["edges"].split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --edges: {exc}") from exc
    rows, slope = bench_mod.bench_cheb_apply(
        edge_targets=targets, order=resolved["m"], s=resolved["s"],
        seed=resolved["seed"],
    )
    print("n\tedges\tnnz\tseconds")
    for r in rows:
        print(f"{r.n}\t{r.num_edges}\t{r.nnz}\t{r.seconds:.6g}")
    pairs = [("cheb_apply_slope", f"{slope:.4f}")]
    if resolved["full"]:
        tables = bench_mod.bench_materialize(seed=resolved["seed"])
        print("method\tn\tedges\tseconds")
        for name, table in tables.items():
            for r in table:
                print(f"{name}\t{r.n}\t{r.num_edges}\t{r.seconds:.6g}")
        exact_slope = bench_mod.fit_loglog_slope(
            [r.n for r in tables["exact"]],
            [r.seconds for r in tables["exact"]],
        )
        ratio = bench_mod.bench_order_ratio(s=resolved["s"],
                                            seed=resolved["seed"])
        pairs.append(("exact_materialize_slope_n", f"{exact_slope:.4f}"))
        pairs.append(("order_ratio_30_over_10", f"{ratio:.4f}"))
    _emit(pairs)
    return 0


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwnn",
        description="Sparse graph wavelet toolkit: bases, training, analyses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_basis = sub.add_parser("basis", help="build and cache a wavelet basis")
    _add_opts(p_basis, COMMON + DATA + BUILD + [Opt("out", str, None, "basis cache path")])
    p_basis.set_defaults(func=cmd_basis)

    p_train = sub.add_parser("train", help="train the node classifier")
    _add_opts(p_train, COMMON + DATA + BUILD + TRAIN +
              [Opt("out", str, None, "checkpoint path"),
               Opt("history", str, None, "training history CSV path")])
    p_train.set_defaults(func=cmd_train)

    p_sweep = sub.add_parser("sweep", help="grid-search s and t")
    _add_opts(p_sweep, COMMON + DATA + BUILD + TRAIN +
              [Opt("s_grid", str, "0.25,0.5,0.75,1.0,1.25,1.5", ""),
               Opt("t_grid", str, "1e-4", ""),
               Opt("seed_mode", str, "fixed", "", ("fixed", "per-point")),
               Opt("out", str, None, "TSV output path")])
    p_sweep.set_defaults(func=cmd_sweep)

    p_analyze = sub.add_parser("analyze", help="interpretability and locality")
    asub = p_analyze.add_subparsers(dest="analysis", required=True)

    p_top = asub.add_parser("top-bases", help="largest projected values of a feature")
    _add_opts(p_top, COMMON + DATA + BUILD +
              [Opt("basis", str, None, ""), Opt("feature", int, None, ""),
               Opt("k", int, 10, "")])
    p_top.set_defaults(func=cmd_analyze_top_bases)

    p_loc = asub.add_parser("locality", help="hop-mass histogram of one column")
    _add_opts(p_loc, COMMON + DATA + BUILD +
              [Opt("basis", str, None, ""), Opt("node", int, None, "")])
    p_loc.set_defaults(func=cmd_analyze_locality)

    p_sup = asub.add_parser("support", help="convolution support matrix H")
    _add_opts(p_sup, COMMON + DATA + BUILD +
              [Opt("basis", str, None, ""), Opt("row", int, None, "")])
    p_sup.set_defaults(func=cmd_analyze_support)

    p_bench = sub.add_parser("bench", help="scaling measurements")
    _add_opts(p_bench, COMMON +
              [Opt("edges", str, "1000,10000,100000", ""),
               Opt("m", int, 30, ""), Opt("s", float, 1.0, ""),
               Opt("full", bool, False, "")])
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"gwnn {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gwnn {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"gwnn {ns.command}: data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"gwnn {ns.command}: data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"gwnn {ns.command}: numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
