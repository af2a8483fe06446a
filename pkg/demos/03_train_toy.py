"""Train the two-layer wavelet network on the bundled toy dataset: two
five-cliques joined by one bridge edge, labels split along the cliques.
"""

from pathlib import Path

from gwnn import (
    GwnnModel,
    ModelConfig,
    TrainConfig,
    eigendecompose,
    evaluate,
    label_rate,
    load_dataset,
    normalized_laplacian,
    train,
    wavelet_basis_exact,
)

toy = Path(__file__).resolve().parents[1] / "tests" / "data" / "toy"
ds = load_dataset(toy)
print(f"toy dataset: n={ds.n}, p={ds.p}, c={ds.c}, "
      f"|E|={ds.graph.num_edges}, label rate {label_rate(ds):.0%}")

basis = wavelet_basis_exact(
    eigendecompose(normalized_laplacian(ds.graph)), s=1.0, t=0.0)

model = GwnnModel(ModelConfig(n=ds.n, p=ds.p, c=ds.c, hidden=8, seed=0))
model, history = train(model, basis, ds,
                       TrainConfig(lr=0.01, max_epochs=500, patience=50))

best = min(history, key=lambda r: r["val_loss"])
print(f"ran {len(history)} epochs; best val loss {best['val_loss']:.4f} "
      f"at epoch {best['epoch']}")

# A few snapshots of the loss curve.
print()
print("epoch   train_loss   val_loss   val_acc")
for rec in history[:: max(1, len(history) // 8)]:
    print(f"{rec['epoch']:>5}   {rec['train_loss']:>10.4f}   "
          f"{rec['val_loss']:>8.4f}   {rec['val_acc']:>7.2f}")

print()
for split in ("train", "val", "test"):
    print(f"{split} accuracy: {evaluate(model, basis, ds, split):.3f}")
