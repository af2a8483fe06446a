import numpy as np
import pytest
import scipy.sparse as sp

from gwnn.analysis import (
    matrix_density,
    projected_signal_stats,
    sparsity_report,
    top_active_bases,
)
from gwnn.graphs import load_graph, normalized_laplacian, random_connected_graph
from gwnn.spectral import eigendecompose, wavelet_basis_exact


def p3():
    return load_graph([(0, 1), (1, 2)], 3)


def toy_basis(s=1.0, t=0.0, n=12, extra=5, seed=0):
    g = random_connected_graph(n, extra_edges=extra, seed=seed)
    return g, wavelet_basis_exact(
        eigendecompose(normalized_laplacian(g)), s=s, t=t)


class TestMatrixDensity:
    def test_identity(self):
        assert matrix_density(sp.eye_array(4, format="csr")) == (0.25, 4)

    def test_dense_input_counts_nonzeros(self):
        d, nnz = matrix_density(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert (d, nnz) == (0.25, 1)

    def test_counts_stored_entries_after_threshold(self):
        g, basis = toy_basis(s=1.0, t=1e-2)
        d, nnz = matrix_density(basis.psi_inv)
        assert nnz == basis.psi_inv.nnz
        assert d < 1.0


class TestProjectedSignalStats:
    def test_zero_feature_column(self):
        _, basis = toy_basis()
        X = sp.csr_array((basis.n, 3))
        nnz, density, v = projected_signal_stats(basis, X, 1)
        assert nnz == 0
        assert density == 0.0
        np.testing.assert_array_equal(v, np.zeros(basis.n))

    def test_identity_basis_returns_the_column(self):
        g = p3()
        basis = wavelet_basis_exact(
            eigendecompose(normalized_laplacian(g)), s=0.0, t=0.0)
        X = np.array([[0.0, 2.0], [0.0, 0.0], [0.0, -3.0]])
        # reconstruction noise leaves ~1e-16 residue on the zero entry, so
        # count with a tolerance rather than relying on exact cancellation
        nnz, density, v = projected_signal_stats(basis, X, 1, t_signal=1e-12)
        assert nnz == 2
        assert density == pytest.approx(2 / 3)
        np.testing.assert_allclose(v, [2.0, 0.0, -3.0], atol=1e-12)

    def test_signal_threshold_filters_small_entries(self):
        g = p3()
        basis = wavelet_basis_exact(
            eigendecompose(normalized_laplacian(g)), s=0.0, t=0.0)
        X = np.array([[1e-6], [0.5], [0.0]])
        nnz, _, _ = projected_signal_stats(basis, X, 0, t_signal=1e-3)
        assert nnz == 1

    def test_eigensystem_route_uses_fourier_projection(self):
        g = p3()
        es = eigendecompose(normalized_laplacian(g))
        X = np.array([[1.0], [0.0], [0.0]])
        _, _, v = projected_signal_stats(es, X, 0)
        np.testing.assert_allclose(v, es.U.T @ X[:, 0], atol=1e-12)

    def test_feature_index_out_of_range(self):
        _, basis = toy_basis()
        with pytest.raises(IndexError):
            projected_signal_stats(basis, np.zeros((basis.n, 2)), 2)

    def test_unknown_transform_type(self):
        with pytest.raises(TypeError):
            projected_signal_stats(np.eye(3), np.zeros((3, 1)), 0)


class TestTopActiveBases:
    def test_descending_order_full_length(self):
        _, basis = toy_basis(seed=3)
        X = np.random.default_rng(0).random((basis.n, 2))
        out = top_active_bases(basis, X, 0, basis.n)
        vals = [v for _, v in out]
        assert vals == sorted(vals, reverse=True)

    def test_identity_basis_picks_largest_entries(self):
        g = p3()
        basis = wavelet_basis_exact(
            eigendecompose(normalized_laplacian(g)), s=0.0, t=0.0)
        X = np.array([[0.2], [0.9], [0.5]])
        out = top_active_bases(basis, X, 0, 2)
        assert out[0][0] == 1
        assert out[0][1] == pytest.approx(0.9)
        assert out[1][0] == 2

    def test_ties_break_to_lower_index(self):
        g = p3()
        basis = wavelet_basis_exact(
            eigendecompose(normalized_laplacian(g)), s=0.0, t=0.0)
        X = np.array([[0.5], [0.5], [0.5]])
        out = top_active_bases(basis, X, 0, 3)
        assert [i for i, _ in out] == [0, 1, 2]

    def test_k_too_large(self):
        _, basis = toy_basis()
        with pytest.raises(ValueError):
            top_active_bases(basis, np.zeros((basis.n, 1)), 0, basis.n + 1)

    def test_prefix_property(self):
        _, basis = toy_basis(seed=4)
        X = np.random.default_rng(1).random((basis.n, 1))
        assert top_active_bases(basis, X, 0, 3) == \
            top_active_bases(basis, X, 0, 7)[:3]


class TestSparsityReport:
    def test_p3_laplacian_rows(self):
        g = p3()
        es = eigendecompose(normalized_laplacian(g))
        basis = wavelet_basis_exact(es, s=1.0, t=0.0)
        rep = sparsity_report(g, basis, eigensystem=es)
        rows = {r[0]: r for r in rep.rows}
        # 2|E| = 4 off-diagonal entries, 7 total stored entries
        assert rows["laplacian_offdiag"][2] == 4
        assert rows["laplacian_full"][2] == 7
        assert rows["U_T"][2] == 9

    def test_eigensystem_row_optional(self):
        g = p3()
        basis = wavelet_basis_exact(
            eigendecompose(normalized_laplacian(g)), s=1.0, t=0.0)
        rep = sparsity_report(g, basis)
        names = [r[0] for r in rep.rows]
        assert "U_T" not in names
        assert {"psi", "psi_inv"} <= set(names)

    def test_threshold_shows_up_as_density_drop(self):
        g = random_connected_graph(40, extra_edges=20, seed=1)
        es = eigendecompose(normalized_laplacian(g))
        dense_rep = sparsity_report(g, wavelet_basis_exact(es, s=1.0, t=0.0))
        sparse_rep = sparsity_report(g, wavelet_basis_exact(es, s=1.0, t=1e-2))
        dense_rows = {r[0]: r for r in dense_rep.rows}
        sparse_rows = {r[0]: r for r in sparse_rep.rows}
        assert sparse_rows["psi_inv"][1] < dense_rows["psi_inv"][1]

    def test_metadata_line(self):
        g, basis = toy_basis(s=0.5, t=1e-4)
        rep = sparsity_report(g, basis)
        meta = rep.to_tsv().splitlines()[0]
        assert meta.startswith("#")
        assert "s=0.5" in meta
        assert "t=0.0001" in meta
        assert "exact" in meta
        assert "convention=" in meta

    def test_tsv_parses(self):
        g, basis = toy_basis()
        lines = [ln for ln in sparsity_report(g, basis).to_tsv().splitlines()
                 if ln and not ln.startswith("#")]
        header = lines[0].split("\t")
        assert header[0] == "matrix"
        for ln in lines[1:]:
            parts = ln.split("\t")
            assert len(parts) == len(header)
            float(parts[1])
            int(parts[2])
