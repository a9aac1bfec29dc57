"""Sparse matrix construction, products, serialization, and norm estimation."""

import numpy as np
import pytest

from seqform import (DimensionError, FileFormatError, SparseMatrix,
                     ValidationError, build_K, simplex_game, spectral_norm)
from seqform.oracle import dense_spectral_norm


def test_duplicate_triplets_are_summed():
    m = SparseMatrix(2, 3, [(0, 0, 1.0), (0, 0, 2.0), (1, 2, -1.0)])
    assert np.array_equal(m.to_dense(), [[3.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    assert m.shape == (2, 3)
    assert m.nnz == 2


def test_empty_matrix():
    m = SparseMatrix.zeros(3, 2)
    assert m.nnz == 0
    assert np.array_equal(m.matvec([1.0, 2.0]), np.zeros(3))
    assert m.triplets() == []


def test_identity():
    m = SparseMatrix.identity(3)
    v = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(m.matvec(v), v)
    assert np.array_equal(m.transpose_matvec(v), v)


def test_from_dense_round_trip():
    dense = np.array([[0.0, 1.5], [-2.0, 0.0], [0.0, 0.25]])
    m = SparseMatrix.from_dense(dense)
    assert m.nnz == 3
    assert np.array_equal(m.to_dense(), dense)
    with pytest.raises(ValueError):
        SparseMatrix.from_dense(np.zeros(4))


def test_construction_errors():
    with pytest.raises(ValueError):
        SparseMatrix(0, 1)
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, [(2, 0, 1.0)])
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, [(0, -1, 1.0)])
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, [(0, 0, float("nan"))])


def test_matvec_matches_dense():
    rng = np.random.default_rng(0)
    dense = rng.standard_normal((7, 5))
    dense[np.abs(dense) < 0.8] = 0.0
    m = SparseMatrix.from_dense(dense)
    v = rng.standard_normal(5)
    u = rng.standard_normal(7)
    assert np.allclose(m.matvec(v), dense @ v, atol=1e-14)
    assert np.allclose(m.transpose_matvec(u), dense.T @ u, atol=1e-14)


def test_matvec_dimension_errors():
    m = SparseMatrix.zeros(3, 2)
    with pytest.raises(DimensionError):
        m.matvec([1.0, 2.0, 3.0])
    with pytest.raises(DimensionError):
        m.transpose_matvec([1.0, 2.0])


def test_transpose_and_scaled():
    dense = np.array([[1.0, 0.0], [2.0, -3.0]])
    m = SparseMatrix.from_dense(dense)
    assert np.array_equal(m.transpose().to_dense(), dense.T)
    assert np.array_equal(m.scaled(-2.0).to_dense(), -2.0 * dense)


def test_triplets_row_major():
    m = SparseMatrix(2, 3, [(1, 0, 4.0), (0, 2, 1.0), (0, 1, 2.0)])
    assert m.triplets() == [(0, 1, 2.0), (0, 2, 1.0), (1, 0, 4.0)]


def test_dict_round_trip():
    m = SparseMatrix(2, 2, [(0, 1, 0.5), (1, 0, -1.0)])
    again = SparseMatrix.from_dict(m.to_dict())
    assert again.shape == m.shape
    assert again.triplets() == m.triplets()


@pytest.mark.parametrize("doc", [
    "not a dict",
    {"rows": 2, "cols": 2},
    {"rows": 2.0, "cols": 2, "triplets": []},
    {"rows": 2, "cols": 2, "triplets": [[0, 0]]},
    {"rows": 2, "cols": 2, "triplets": [[0, 0.5, 1.0]]},
    {"rows": 2, "cols": 2, "triplets": [[5, 0, 1.0]]},
])
def test_from_dict_rejects_malformed(doc):
    with pytest.raises(FileFormatError):
        SparseMatrix.from_dict(doc)


def test_spectral_norm_diagonal():
    est = spectral_norm(SparseMatrix.from_dense([[3.0, 0.0], [0.0, 1.0]]))
    assert est.converged
    assert abs(est.value - 3.0) < 1e-9


def test_spectral_norm_zero_matrix():
    est = spectral_norm(SparseMatrix.zeros(4, 4))
    assert est.converged
    assert est.value == 0.0


def test_spectral_norm_accuracy():
    rng = np.random.default_rng(11)
    dense = rng.standard_normal((12, 9))
    est = spectral_norm(SparseMatrix.from_dense(dense))
    exact = np.linalg.norm(dense, 2)
    assert est.converged
    assert abs(est.value - exact) / exact < 1e-6


def test_spectral_norm_deterministic():
    m = SparseMatrix.from_dense(np.random.default_rng(3).standard_normal((8, 8)))
    a = spectral_norm(m, seed=5)
    b = spectral_norm(m, seed=5)
    assert a == b


def test_spectral_norm_parameter_validation():
    m = SparseMatrix.identity(2)
    with pytest.raises(ValueError):
        spectral_norm(m, rel_tol=0.0)
    with pytest.raises(ValueError):
        spectral_norm(m, max_iter=0)


def test_spectral_norm_iteration_budget():
    # two close singular values force more than one round
    m = SparseMatrix.from_dense([[1.0, 0.0], [0.0, 0.999]])
    est = spectral_norm(m, max_iter=1)
    assert not est.converged
    assert est.iterations == 1


def test_build_K_dense_layout():
    game = simplex_game(SparseMatrix.from_dense([[1.0, 2.0], [3.0, 4.0]]))
    K = build_K(game)
    assert K.shape == (3, 3)
    assert np.array_equal(K.to_dense(), [
        [1.0, 2.0, -1.0],
        [3.0, 4.0, -1.0],
        [1.0, 1.0, 0.0],
    ])


def test_build_K_matches_oracle_norm():
    game = simplex_game(SparseMatrix.from_dense([[1.0, -1.0], [-1.0, 1.0]]))
    K = build_K(game)
    est = spectral_norm(K)
    exact = dense_spectral_norm(K)
    assert exact == 2.0
    assert abs(est.value - exact) / exact < 1e-6


def test_build_K_rejects_invalid_game():
    game = simplex_game(SparseMatrix.from_dense([[1.0, 2.0], [3.0, 4.0]]))
    bad = type(game)(A=game.A, E1=game.E1, E2=game.E2,
                     e1=np.array([0.9]), e2=game.e2)
    with pytest.raises(ValidationError) as err:
        build_K(bad)
    assert err.value.violations
    assert "e1" in str(err.value)
