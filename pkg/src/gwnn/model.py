"""Two-layer graph wavelet network for semi-supervised node classification.

Each layer detaches the feature transformation from the graph convolution:

    X' = X_in W                      (dense p x q weight)
    out = h(psi diag(F) psi_inv X')  (length-n spectral filter diagonal F)

so a layer carries p*q + n parameters instead of n*p*q. Layer 1 uses ReLU
with inverted dropout on its input, layer 2 row-softmax. Training is
full-batch gradient descent with hand-derived gradients, Adam, and early
stopping on validation loss. Everything is deterministic given the seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .serialize import savez_deterministic
from .spectral import SpectralBasis

__all__ = [
    "LayerParams",
    "ModelConfig",
    "TrainConfig",
    "Prediction",
    "GwnnModel",
    "EarlyStopper",
    "AdamState",
    "glorot_init",
    "adam_init",
    "adam_step",
    "cross_entropy",
    "parameter_count",
    "train",
    "evaluate",
    "save_checkpoint",
    "load_checkpoint",
    "write_history_csv",
]

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

CHECKPOINT_FORMAT_VERSION = 1

# Conventions recorded in every checkpoint: the loss sums over labeled
# nodes (no averaging), and argmax ties resolve to the lowest class index.
LOSS_CONVENTION = "sum"
TIE_BREAK = "lowest-index"


@dataclass
class LayerParams:
    """One layer: dense feature weight W (p x q) and the length-n diagonal
    of the spectral filter."""

    W: np.ndarray
    F: np.ndarray


@dataclass(frozen=True)
class ModelConfig:
    n: int
    p: int
    c: int
    hidden: int = 16
    s: float = 1.0
    t: float = 1e-4
    dropout_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        for name in ("n", "p", "c"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.01
    max_epochs: int = 2000
    patience: int = 100
    weight_decay: float = 0.0

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass(frozen=True)
class Prediction:
    """Row-stochastic class probabilities, one row per node."""

    Z: np.ndarray


def glorot_init(rows: int, cols: int, seed: int) -> np.ndarray:
    """Uniform init in +/- sqrt(6 / (rows + cols))."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return _glorot(np.random.default_rng(seed), rows, cols)


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def _softmax_rows(S: np.ndarray) -> np.ndarray:
    # max subtraction keeps exp() in range for arbitrary logit magnitudes
    e = np.exp(S - S.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(pred: Prediction, labels: np.ndarray, idx: np.ndarray) -> float:
    """-sum_{l in idx} ln Z[l, labels[l]]; summed, not averaged."""
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("index set is empty")
    labels = np.asarray(labels, dtype=np.int64)
    c = pred.Z.shape[1]
    picked = labels[idx]
    if picked.min() < 0 or picked.max() >= c:
        raise ValueError(f"label out of range [0, {c})")
    return float(-np.sum(np.log(pred.Z[idx, picked])))


def parameter_count(config: ModelConfig) -> int:
    """Sum over layers of p*q + n."""
    dims = [config.p, config.hidden, config.c]
    return sum(dims[i] * dims[i + 1] + config.n for i in range(len(dims) - 1))


class GwnnModel:
    """Holds the layer parameters and the seeded RNG that drives both
    initialization and dropout masks, so a (config, seed) pair fixes the
    whole training trajectory."""

    def __init__(self, config: ModelConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        dims = [config.p, config.hidden, config.c]
        self.layers = [
            LayerParams(
                W=_glorot(self.rng, dims[i], dims[i + 1]),
                F=np.ones(config.n),
            )
            for i in range(len(dims) - 1)
        ]
        # bumped on every parameter update; forward caches carry the value
        # they saw so backward can reject a stale cache
        self._version = 0

    # -- forward ---------------------------------------------------------

    def forward(
        self, basis: SpectralBasis, X, train_mode: bool = False
    ) -> tuple[Prediction, dict]:
        cfg = self.config
        if X.shape != (cfg.n, cfg.p):
            raise ValueError(f"X has shape {X.shape}, expected ({cfg.n}, {cfg.p})")
        if basis.n != cfg.n:
            raise ValueError(f"basis is for n={basis.n}, model expects n={cfg.n}")
        rate = cfg.dropout_rate if train_mode else 0.0
        cache: dict = {"train_mode": train_mode, "version": self._version,
                       "basis": basis, "layers": []}
        cur = X
        last = len(self.layers) - 1
        for i, lay in enumerate(self.layers):
            entry: dict = {}
            if rate > 0.0:
                cur, mult = _dropout(self.rng, cur, rate)
                if mult is not None:
                    entry["drop_mult"] = mult
            entry["input"] = cur
            xw = cur @ lay.W
            a = basis.psi_inv @ xw
            pre = basis.psi @ (lay.F[:, None] * a)
            entry["a"] = a
            entry["pre"] = pre
            cur = _softmax_rows(pre) if i == last else np.maximum(pre, 0.0)
            cache["layers"].append(entry)
        return Prediction(Z=cur), cache

    def loss(
        self,
        pred: Prediction,
        labels: np.ndarray,
        train_idx: np.ndarray,
        weight_decay: float = 0.0,
    ) -> float:
        total = cross_entropy(pred, labels, train_idx)
        if weight_decay:
            total += 0.5 * weight_decay * float(np.sum(self.layers[0].W ** 2))
        return total

    # -- backward --------------------------------------------------------

    def backward(
        self,
        cache: dict,
        labels: np.ndarray,
        train_idx: np.ndarray,
        weight_decay: float = 0.0,
    ) -> list[LayerParams]:
        """Analytic gradients of the training loss; returns one (dW, dF)
        pair per layer, packaged as LayerParams."""
        if cache.get("version") != self._version:
            raise ValueError("stale forward cache: parameters changed since forward()")
        basis: SpectralBasis = cache["basis"]
        train_idx = np.asarray(train_idx, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        entries = cache["layers"]
        n, c = self.config.n, self.config.c

        Z = _softmax_rows(entries[-1]["pre"])
        dS = np.zeros((n, c))
        dS[train_idx] = Z[train_idx]
        dS[train_idx, labels[train_idx]] -= 1.0

        grads: list[LayerParams] = [None] * len(self.layers)  # type: ignore[list-item]
        psi_T = basis.psi.T.tocsr()
        inv_T = basis.psi_inv.T.tocsr()
        for i in range(len(self.layers) - 1, -1, -1):
            lay = self.layers[i]
            ent = entries[i]
            dB = psi_T @ dS
            dF = np.sum(dB * ent["a"], axis=1)
            dXp = inv_T @ (lay.F[:, None] * dB)
            dW = ent["input"].T @ dXp
            if i == 0 and weight_decay:
                dW = dW + weight_decay * lay.W
            grads[i] = LayerParams(W=np.asarray(dW), F=dF)
            if i > 0:
                d_out = dXp @ lay.W.T
                if "drop_mult" in ent:
                    d_out = d_out * ent["drop_mult"]
                dS = d_out * (entries[i - 1]["pre"] > 0.0)
        return grads

    # -- parameter plumbing ----------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        out = []
        for lay in self.layers:
            out.append(lay.W)
            out.append(lay.F)
        return out

    def set_parameters(self, arrays: list[np.ndarray]) -> None:
        expect = 2 * len(self.layers)
        if len(arrays) != expect:
            raise ValueError(f"expected {expect} arrays, got {len(arrays)}")
        it = iter(arrays)
        for lay in self.layers:
            W, F = next(it), next(it)
            if W.shape != lay.W.shape or F.shape != lay.F.shape:
                raise ValueError("parameter shape mismatch")
            lay.W = W
            lay.F = F
        self._version += 1

    def snapshot(self) -> list[np.ndarray]:
        return [p.copy() for p in self.parameters()]


def _dropout(rng: np.random.Generator, x, rate: float):
    """Inverted dropout: kept entries scaled by 1/(1-rate) so evaluation
    needs no rescaling. Sparse inputs are masked on their stored entries
    (dropping a structural zero is a no-op)."""
    scale = 1.0 / (1.0 - rate)
    if sp.issparse(x):
        keep = rng.random(x.nnz) >= rate
        dropped = x.copy()
        dropped.data = dropped.data * (keep * scale)
        return dropped, None
    mult = (rng.random(x.shape) >= rate) * scale
    return x * mult, mult


# -- Adam ---------------------------------------------------------------


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0


def adam_init(params: list[np.ndarray]) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        step=0,
    )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
) -> tuple[list[np.ndarray], AdamState]:
    """Standard bias-corrected Adam; updates arrays in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads, and state must have matching lengths")
    state.step += 1
    t = state.step
    bc1 = 1.0 - ADAM_BETA1 ** t
    bc2 = 1.0 - ADAM_BETA2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
    return params, state


# -- early stopping ------------------------------------------------------


class EarlyStopper:
    """Stop when the monitored loss has not strictly decreased for
    ``patience`` consecutive epochs; remembers the best epoch."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError("patience must be >= 1")
        self.patience = patience
        self.best = math.inf
        self.best_epoch = -1

    def update(self, epoch: int, value: float) -> bool:
        """Record this epoch's value; True means stop now."""
        if value < self.best:
            self.best = value
            self.best_epoch = epoch
            return False
        return epoch - self.best_epoch >= self.patience


# -- training loop -------------------------------------------------------


def _flatten_grads(grads: list[LayerParams]) -> list[np.ndarray]:
    out = []
    for g in grads:
        out.append(g.W)
        out.append(g.F)
    return out


def train(
    model: GwnnModel,
    basis: SpectralBasis,
    dataset,
    train_cfg: TrainConfig,
) -> tuple[GwnnModel, list[dict]]:
    """Full-batch training with Adam and early stopping.

    Returns the model restored to its best-validation-loss parameters and a
    history of per-epoch records (epoch, train_loss, val_loss, val_acc).
    """
    train_idx = np.asarray(dataset.split["train"], dtype=np.int64)
    val_idx = np.asarray(dataset.split["val"], dtype=np.int64)
    if train_idx.size == 0 or val_idx.size == 0:
        raise DataError("train and val splits must be nonempty")
    labels = np.asarray(dataset.labels, dtype=np.int64)
    X = dataset.X

    state = adam_init(model.parameters())
    stopper = EarlyStopper(train_cfg.patience)
    best_params = model.snapshot()
    history: list[dict] = []

    for epoch in range(train_cfg.max_epochs):
        pred, cache = model.forward(basis, X, train_mode=True)
        train_loss = model.loss(pred, labels, train_idx, train_cfg.weight_decay)
        grads = model.backward(cache, labels, train_idx, train_cfg.weight_decay)
        adam_step(model.parameters(), _flatten_grads(grads), state, train_cfg.lr)
        model._version += 1

        val_pred, _ = model.forward(basis, X, train_mode=False)
        val_loss = cross_entropy(val_pred, labels, val_idx)
        val_acc = _accuracy(val_pred, labels, val_idx)
        history.append(
            {"epoch": epoch, "train_loss": train_loss,
             "val_loss": val_loss, "val_acc": val_acc}
        )
        improved = val_loss < stopper.best
        stop = stopper.update(epoch, val_loss)
        if improved:
            best_params = model.snapshot()
        if stop:
            break

    model.set_parameters(best_params)
    return model, history


def _accuracy(pred: Prediction, labels: np.ndarray, idx: np.ndarray) -> float:
    # np.argmax resolves ties to the lowest index, matching TIE_BREAK
    guesses = np.argmax(pred.Z[idx], axis=1)
    return float(np.mean(guesses == labels[idx]))


def evaluate(model: GwnnModel, basis: SpectralBasis, dataset, split: str) -> float:
    """Argmax-match fraction on the named split."""
    idx = np.asarray(dataset.split[split], dtype=np.int64)
    if idx.size == 0:
        raise ValueError(f"split {split!r} is empty")
    pred, _ = model.forward(basis, dataset.X, train_mode=False)
    return _accuracy(pred, np.asarray(dataset.labels, dtype=np.int64), idx)


# -- checkpoint container ------------------------------------------------
#
# Deterministic .npz (see gwnn.serialize): config echo, conventions, and
# all parameter arrays. Keys: version, n, p, hidden, c, s, t, dropout_rate,
# seed, num_layers, swap_kernel, loss_convention, tie_break, best_epoch,
# W<i> / F<i> per layer.


def save_checkpoint(
    model: GwnnModel,
    path,
    basis: SpectralBasis | None = None,
    best_epoch: int = -1,
    extra: dict | None = None,
) -> None:
    cfg = model.config
    arrays = {
        "version": np.int64(CHECKPOINT_FORMAT_VERSION),
        "n": np.int64(cfg.n),
        "p": np.int64(cfg.p),
        "hidden": np.int64(cfg.hidden),
        "c": np.int64(cfg.c),
        "s": np.float64(cfg.s),
        "t": np.float64(cfg.t),
        "dropout_rate": np.float64(cfg.dropout_rate),
        "seed": np.int64(cfg.seed),
        "num_layers": np.int64(len(model.layers)),
        "swap_kernel": np.int64(
            1 if (basis is not None and basis.swap_kernel) else 0
        ),
        "loss_convention": np.array(LOSS_CONVENTION),
        "tie_break": np.array(TIE_BREAK),
        "best_epoch": np.int64(best_epoch),
    }
    for i, lay in enumerate(model.layers):
        arrays[f"W{i}"] = lay.W
        arrays[f"F{i}"] = lay.F
    if extra:
        for key, value in extra.items():
            arrays[f"extra_{key}"] = np.float64(value)
    savez_deterministic(Path(path), **arrays)


def load_checkpoint(path) -> tuple[GwnnModel, dict]:
    with np.load(Path(path)) as d:
        version = int(d["version"])
        if version != CHECKPOINT_FORMAT_VERSION:
            raise DataError(f"checkpoint {path}: format version {version} not supported")
        cfg = ModelConfig(
            n=int(d["n"]), p=int(d["p"]), c=int(d["c"]), hidden=int(d["hidden"]),
            s=float(d["s"]), t=float(d["t"]),
            dropout_rate=float(d["dropout_rate"]), seed=int(d["seed"]),
        )
        model = GwnnModel(cfg)
        arrays = []
        for i in range(int(d["num_layers"])):
            arrays.append(np.array(d[f"W{i}"]))
            arrays.append(np.array(d[f"F{i}"]))
        model.set_parameters(arrays)
        meta = {
            "swap_kernel": bool(int(d["swap_kernel"])),
            "loss_convention": str(d["loss_convention"][()]),
            "tie_break": str(d["tie_break"][()]),
            "best_epoch": int(d["best_epoch"]),
            "extra": {
                key[len("extra_"):]: float(d[key])
                for key in d.files if key.startswith("extra_")
            },
        }
    return model, meta


def write_history_csv(history: list[dict], path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["epoch", "train_loss", "val_loss", "val_acc"]
        )
        writer.writeheader()
        for row in history:
            writer.writerow(row)
