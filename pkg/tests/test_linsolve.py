"""
稀疏线性代数
"""
import numpy as np
import pytest
import scipy.sparse as sp

from src.core.domain.linsolve import (DirectFactorization, SparseMatrix, min_eig_estimate, solve_cg,
                                      solve_cg_info, solve_direct)
from src.core.errors import SingularMatrixError, SPDViolationError


def laplace_1d(n: int) -> sp.csr_matrix:
    return sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()


def test_direct_solve_saddle_point():
    A = laplace_1d(20)
    B = sp.csr_matrix(np.ones((20, 1)))
    M = sp.bmat([[A, B], [B.T, -sp.identity(1)]]).tocsr()
    rng = np.random.default_rng(1)
    x = rng.standard_normal(21)
    rhs = M @ x
    assert np.allclose(solve_direct(M, rhs), x)


def test_factorization_is_reusable():
    A = laplace_1d(30)
    factor = DirectFactorization(A)
    for seed in range(3):
        b = np.random.default_rng(seed).standard_normal(30)
        x = factor.solve(b)
        assert factor.residual(x, b) <= 1e-10 * factor.residual_bound(x, b)


def test_zero_row_is_singular():
    A = laplace_1d(5).tolil()
    A[2, :] = 0.0
    with pytest.raises(SingularMatrixError):
        DirectFactorization(A.tocsr())


def test_cg_matches_direct():
    A = laplace_1d(50)
    b = np.ones(50)
    info = solve_cg_info(A, b, tol=1e-12)
    assert np.allclose(info.x, solve_direct(A, b))
    assert info.iterations > 0


def test_cg_zero_rhs():
    assert not solve_cg(laplace_1d(10), np.zeros(10)).any()


def test_cg_rejects_indefinite_diagonal():
    A = -laplace_1d(10)
    with pytest.raises(SPDViolationError):
        solve_cg(A, np.ones(10))


def test_min_eig_dense_path():
    assert min_eig_estimate(sp.diags(np.arange(1.0, 6.0))) == pytest.approx(1.0)


def test_min_eig_shift_invert_path():
    n = 500
    exact = 2.0 - 2.0 * np.cos(np.pi / (n + 1))
    assert min_eig_estimate(laplace_1d(n), tol=1e-12) == pytest.approx(exact, rel=1e-6)


def test_symmetry_defect_and_export(tmp_path):
    S = SparseMatrix(laplace_1d(12), symmetric=True)
    assert S.symmetry_defect() < 1e-14
    path = S.export(tmp_path / "L.mtx")
    assert path.read_text().startswith("%%MatrixMarket")
    N = SparseMatrix.from_triplets([0, 1], [1, 0], [1.0, 2.0], 2)
    assert N.symmetry_defect() > 0.01
