"""
稀疏对称线性代数: 直接分解、共轭梯度、最小特征值估计
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import (ConvergenceError, EigenvalueError, LinearSolverError,
                      SingularMatrixError, SPDViolationError)

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-14
RESIDUAL_TOL = 1e-10
DENSE_EIG_LIMIT = 400


@dataclass
class SparseMatrix:
    """带对称标记的稀疏矩阵"""
    data: sp.csr_matrix
    symmetric: bool = False

    @classmethod
    def from_triplets(cls, rows, cols, vals, n: int, symmetric: bool = False) -> "SparseMatrix":
        return cls(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr(), symmetric)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def symmetry_defect(self, probes: int = 4, seed: int = 0) -> float:
        """随机探测 |xᵀ(M − Mᵀ)y| / max|a|"""
        rng = np.random.default_rng(seed)
        scale = abs(self.data).max() or 1.0
        worst = 0.0
        for _ in range(probes):
            x = rng.standard_normal(self.n)
            y = rng.standard_normal(self.n)
            d = x @ (self.data @ y) - y @ (self.data @ x)
            worst = max(worst, abs(d) / (scale * np.linalg.norm(x) * np.linalg.norm(y)))
        return worst

    def export(self, path: Path):
        """Matrix Market 导出"""
        scipy.io.mmwrite(str(path), self.data, symmetry="symmetric" if self.symmetric else "general")
        return path


MatrixLike = Union[SparseMatrix, sp.spmatrix, np.ndarray]


def as_csr(M: MatrixLike) -> sp.csr_matrix:
    if isinstance(M, SparseMatrix):
        return M.data
    return sp.csr_matrix(M)


def _check_square(M: sp.csr_matrix):
    if M.shape[0] != M.shape[1]:
        raise LinearSolverError(f"矩阵不是方阵: {M.shape}")


def _check_structure(M: sp.csr_matrix):
    row_norm = np.asarray(abs(M).sum(axis=1)).ravel()
    empty = np.flatnonzero(row_norm == 0.0)
    if empty.size:
        raise SingularMatrixError(f"结构奇异: {empty.size} 个零行 (首个 {empty[0]})")


class DirectFactorization:
    """对称平衡后的稀疏 LU, 构造后不可变, 可重复求解"""

    def __init__(self, M: MatrixLike, equilibrate: bool = True, pivot_tol: float = PIVOT_TOL):
        A = as_csr(M).astype(float)
        _check_square(A)
        _check_structure(A)
        self.matrix = A
        if equilibrate:
            row_max = np.asarray(abs(A).max(axis=1).todense()).ravel()
            self.scale = 1.0 / np.sqrt(row_max)
        else:
            self.scale = np.ones(A.shape[0])
        D = sp.diags(self.scale)
        scaled = (D @ A @ D).tocsc()
        try:
            self._lu = spla.splu(scaled)
        except RuntimeError as e:
            raise SingularMatrixError(f"分解失败: {e}") from e
        pivots = np.abs(self._lu.U.diagonal())
        if pivots.size and pivots.min() <= pivot_tol * pivots.max():
            raise SingularMatrixError(
                f"数值奇异: 最小主元 {pivots.min():.3e}, 最大主元 {pivots.max():.3e}")
        logger.debug(f"LU 分解完成: n={A.shape[0]}, nnz(L+U)={self._lu.L.nnz + self._lu.U.nnz}")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def _raw_solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.scale * self._lu.solve(self.scale * rhs)

    def solve(self, rhs: np.ndarray, refine: int = 1) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        x = self._raw_solve(rhs)
        for _ in range(refine):
            x = x + self._raw_solve(rhs - self.matrix @ x)
        return x

    def residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        return float(np.linalg.norm(self.matrix @ x - rhs))

    def residual_bound(self, x: np.ndarray, rhs: np.ndarray) -> float:
        return float(spla.norm(self.matrix) * np.linalg.norm(x) + np.linalg.norm(rhs))

    def as_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator(self.matrix.shape, matvec=self.solve, dtype=float)


def solve_direct(M: MatrixLike, rhs: np.ndarray, tol: float = RESIDUAL_TOL) -> np.ndarray:
    """直接法求解, 残差检查"""
    factor = DirectFactorization(M)
    x = factor.solve(rhs)
    res = factor.residual(x, rhs)
    bound = tol * factor.residual_bound(x, rhs)
    if res > bound:
        raise LinearSolverError(f"直接法残差 {res:.3e} 超过 {bound:.3e}")
    return x


@dataclass(frozen=True)
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float


def solve_cg_info(M: MatrixLike, rhs: np.ndarray, tol: float = 1e-10,
                  maxit: Optional[int] = None) -> CGResult:
    """共轭梯度 (SPD 由调用方保证), 返回迭代信息"""
    A = as_csr(M)
    _check_square(A)
    rhs = np.asarray(rhs, dtype=float)
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return CGResult(np.zeros_like(rhs), 0, 0.0)
    if np.any(A.diagonal() <= 0.0):
        raise SPDViolationError("对角元非正, 不满足 SPD")

    maxit = maxit or 10 * A.shape[0]
    count = [0]

    def callback(xk):
        count[0] += 1

    x, info = spla.cg(A, rhs, rtol=tol, atol=0.0, maxiter=maxit, callback=callback)
    Ax = A @ x
    res = float(np.linalg.norm(Ax - rhs))
    curvature = float(x @ Ax)
    if curvature <= 0.0:
        raise SPDViolationError(f"检测到负曲率 xᵀMx={curvature:.3e}")
    if info > 0 or res > 10.0 * tol * bnorm:
        raise ConvergenceError("CG 未收敛", res / bnorm, count[0])
    logger.debug(f"CG 收敛: 迭代 {count[0]}, 相对残差 {res / bnorm:.3e}")
    return CGResult(x, count[0], res / bnorm)


def solve_cg(M: MatrixLike, rhs: np.ndarray, tol: float = 1e-10, maxit: Optional[int] = None) -> np.ndarray:
    return solve_cg_info(M, rhs, tol, maxit).x


def min_eig_estimate(M: Union[MatrixLike, spla.LinearOperator], tol: float = 1e-6,
                     inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                     shift: Optional[float] = None, seed: int = 0) -> float:
    """最小特征值: 小矩阵直接计算, 否则移位逆迭代 (Lanczos)

    给定 inverse 时它必须作用 (M − shift·I)⁻¹。
    """
    rng = np.random.default_rng(seed)
    if inverse is None:
        A = as_csr(M)
        _check_square(A)
        n = A.shape[0]
        if n <= DENSE_EIG_LIMIT:
            return float(scipy.linalg.eigvalsh(A.toarray())[0])
        if shift is None:
            off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(A.diagonal())
            lower = float(np.min(A.diagonal() - off))
            shift = lower - 1e-3 * max(abs(lower), float(abs(A).max()))
        op, opinv = A, None
    else:
        n = M.shape[0]
        shift = 0.0 if shift is None else shift
        op = M if isinstance(M, spla.LinearOperator) else as_csr(M)
        opinv = spla.LinearOperator((n, n), matvec=inverse, dtype=float)

    try:
        vals = spla.eigsh(op, k=1, sigma=shift, which="LM", OPinv=opinv, tol=tol,
                          v0=rng.standard_normal(n), maxiter=max(1000, 10 * n),
                          return_eigenvectors=False)
    except spla.ArpackNoConvergence as e:
        raise EigenvalueError(f"特征值迭代未收敛: {e}") from e
    except RuntimeError as e:
        raise EigenvalueError(f"移位分解失败: {e}") from e
    return float(np.min(vals))
