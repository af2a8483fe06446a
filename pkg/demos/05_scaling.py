"""Time the Chebyshev apply path as the edge count grows. The cost is
dominated by sparse mat-vecs, so the log-log slope against |E| should sit
near 1, far below the cubic wall of dense eigendecomposition.
"""

from gwnn import bench_cheb_apply, bench_order_ratio

rows, slope = bench_cheb_apply(edge_targets=(1_000, 5_000, 25_000, 100_000),
                               order=30, s=1.0, cols=8, seed=0)

print("n        |E|      laplacian nnz   seconds")
for r in rows:
    print(f"{r.n:<8} {r.num_edges:<8} {r.nnz:<15} {r.seconds:.4f}")
print(f"\nlog-log slope vs |E|: {slope:.3f} (near-linear; < 1.3)")

# Cost is also linear in the expansion order: m=30 should take roughly
# three times as long as m=10 on the same graph.
ratio = bench_order_ratio(num_edges=20_000, order_a=10, order_b=30)
print(f"time ratio m=30 / m=10 at |E|=20k: {ratio:.2f} (expect ~3)")
