"""gwnn: sparse spectral graph convolution with wavelet bases.

The pipeline, end to end:

  graphs    -> normalized Laplacian and CSR plumbing
  spectral  -> exact eigendecomposition path (ground truth, O(n^3))
  chebyshev -> polynomial fast path (no eigendecomposition, O(m |E|))
  model     -> two-layer wavelet network, manual gradients, Adam
  datasets  -> TSV citation-network ingest and paper splits
  analysis  -> density / projected-signal / top-bases measurements
  locality  -> hop-mass histograms and the convolution support matrix
  bench     -> scaling measurements
  cli       -> `gwnn` command tying it together
"""

from .analysis import (
    matrix_density,
    projected_signal_stats,
    sparsity_report,
    top_active_bases,
)
from .chebyshev import (
    ChebCoefficients,
    apply_operator,
    chebyshev_coefficients,
    estimate_lambda_max,
    materialize_basis,
)
from .datasets import Dataset, label_rate, load_dataset, make_paper_split, write_dataset
from .errors import DataError, GwnnError, NumericalError
from .graphs import (
    Graph,
    grid_graph,
    load_graph,
    normalized_laplacian,
    preferential_attachment_graph,
    random_connected_graph,
    read_edge_list,
    sparsify,
    spmm,
    write_edge_list,
)
from .bench import (
    BenchRow,
    bench_cheb_apply,
    bench_materialize,
    bench_order_ratio,
    fit_loglog_slope,
    graph_with_edge_count,
    measure,
)
from .locality import (
    LocalityProfile,
    bfs_hops,
    convolution_support,
    locality_profile,
    theta_convolution,
)
from .model import (
    EarlyStopper,
    GwnnModel,
    ModelConfig,
    Prediction,
    TrainConfig,
    cross_entropy,
    evaluate,
    glorot_init,
    load_checkpoint,
    parameter_count,
    save_checkpoint,
    train,
)
from .spectral import (
    EigenSystem,
    SpectralBasis,
    eigendecompose,
    fourier_convolution,
    fourier_transform,
    inverse_fourier_transform,
    load_basis,
    save_basis,
    wavelet_basis_exact,
    wavelet_convolution,
)

__version__ = "0.1.0"

__all__ = [
    "matrix_density", "projected_signal_stats", "sparsity_report",
    "top_active_bases",
    "ChebCoefficients", "apply_operator", "chebyshev_coefficients",
    "estimate_lambda_max", "materialize_basis",
    "Dataset", "label_rate", "load_dataset", "make_paper_split",
    "write_dataset",
    "BenchRow", "bench_cheb_apply", "bench_materialize", "bench_order_ratio",
    "fit_loglog_slope", "graph_with_edge_count", "measure",
    "DataError", "GwnnError", "NumericalError",
    "Graph", "grid_graph", "load_graph", "normalized_laplacian",
    "preferential_attachment_graph", "random_connected_graph",
    "read_edge_list", "sparsify", "spmm", "write_edge_list",
    "LocalityProfile", "bfs_hops", "convolution_support",
    "locality_profile", "theta_convolution",
    "EarlyStopper", "GwnnModel", "ModelConfig", "Prediction", "TrainConfig",
    "cross_entropy", "evaluate", "glorot_init", "load_checkpoint",
    "parameter_count", "save_checkpoint", "train",
    "EigenSystem", "SpectralBasis", "eigendecompose", "fourier_convolution",
    "fourier_transform", "inverse_fourier_transform", "load_basis",
    "save_basis", "wavelet_basis_exact", "wavelet_convolution",
]
