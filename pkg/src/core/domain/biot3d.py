"""
缩放后的三维准静态 Biot 问题 (固定板层 Ω = ω × (−1, 1))

三线性六面体单元。质量、渗透、耦合与面内弹性形式用 2×2×2 Gauss 积分;
横向剪切项 ε⁻²(∂3w_j + ∂_j w3) 沿 j 方向与 y3 方向改用单点积分 (选择性减缩),
其余方向仍为两点; 因此剪切形式并非全部 2×2×2 积分。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import LabError, ParameterError, SolverStepError
from .grid import FREE, LATERAL_DIRICHLET, Field, Grid3D, apply_diff, l2_norm
from .linsolve import DirectFactorization, SparseMatrix, min_eig_estimate
from .loads import LoadSpec
from .params import DimensionlessParams

logger = logging.getLogger(__name__)

STEP_RESIDUAL_TOL = 1e-9

X, Y, Z = 0, 1, 2


@dataclass
class BiotState:
    w: Field
    pi: Field
    t: float = 0.0

    @classmethod
    def zero(cls, grid: Grid3D) -> "BiotState":
        return cls(Field(grid, np.zeros((3,) + grid.shape), LATERAL_DIRICHLET),
                   Field(grid, np.zeros(grid.shape), FREE), 0.0)

    def max_norm(self) -> float:
        return float(max(np.abs(self.w.values).max(), np.abs(self.pi.values).max()))


def _element_1d(h: float, npts: int):
    """一维线性元的 (质量, 刚度, 混合) 单元矩阵, npts 点 Gauss 积分

    混合矩阵 D[i, j] = ∫ N_i' N_j。
    """
    xi, wq = np.polynomial.legendre.leggauss(npts)
    s = 0.5 * (xi + 1.0)
    N = np.stack([1.0 - s, s])
    dN = np.array([-1.0, 1.0]) / h
    jw = 0.5 * h * wq
    mass = (N * jw) @ N.T
    stiff = np.outer(dN, dN) * jw.sum()
    mixed = np.outer(dN, N @ jw)
    return mass, stiff, mixed


def _assemble_1d(n_cells: int, local: np.ndarray) -> sp.csr_matrix:
    n = n_cells + 1
    rows, cols, vals = [], [], []
    for e in range(n_cells):
        for a in range(2):
            for b in range(2):
                rows.append(e + a)
                cols.append(e + b)
                vals.append(local[a, b])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


class _Factors1D:
    """每个方向的一维因子矩阵, 三维形式由 Kronecker 积组合"""

    def __init__(self, grid: Grid3D):
        cells = (grid.base.nx, grid.base.ny, grid.nz)
        steps = (grid.h, grid.h, grid.hz)
        self.mass, self.stiff, self.mixed, self.lumped = [], [], [], []
        for n, h in zip(cells, steps):
            m, s, d = _element_1d(h, 2)
            m1, _, _ = _element_1d(h, 1)
            self.mass.append(_assemble_1d(n, m))
            self.stiff.append(_assemble_1d(n, s))
            self.mixed.append(_assemble_1d(n, d))
            self.lumped.append(_assemble_1d(n, m1))

    def factor(self, direction: int, trial: Optional[int], test: Optional[int],
               reduced: FrozenSet[int]) -> sp.csr_matrix:
        if direction == trial and direction == test:
            return self.stiff[direction]
        if direction == test:
            return self.mixed[direction]
        if direction == trial:
            return self.mixed[direction].T.tocsr()
        return self.lumped[direction] if direction in reduced else self.mass[direction]

    def form(self, trial: Optional[int], test: Optional[int],
             reduced: FrozenSet[int] = frozenset()) -> sp.csr_matrix:
        """∫ ∂_trial u · ∂_test φ (None 表示不求导), 行为测试函数"""
        fx, fy, fz = (self.factor(d, trial, test, reduced) for d in (X, Y, Z))
        return sp.kron(fz, sp.kron(fy, fx)).tocsr()


def _elasticity_terms(params: DimensionlessParams, eps: float):
    """(试探分量, 试探导数, 测试分量, 测试导数, 系数, 降阶方向)"""
    lam = params.lam
    terms = [
        (0, X, 0, X, 2.0, frozenset()),
        (1, Y, 1, Y, 2.0, frozenset()),
        # (∂2w1 + ∂1w2)(∂2φ1 + ∂1φ2)
        (0, Y, 0, Y, 1.0, frozenset()),
        (1, X, 0, Y, 1.0, frozenset()),
        (0, Y, 1, X, 1.0, frozenset()),
        (1, X, 1, X, 1.0, frozenset()),
        # λ div₂w̃ div₂φ̃
        (0, X, 0, X, lam, frozenset()),
        (1, Y, 0, X, lam, frozenset()),
        (0, X, 1, Y, lam, frozenset()),
        (1, Y, 1, Y, lam, frozenset()),
        # ε⁻²λ (div₂w̃ ∂3φ3 + ∂3w3 div₂φ̃)
        (0, X, 2, Z, lam / eps ** 2, frozenset()),
        (1, Y, 2, Z, lam / eps ** 2, frozenset()),
        (2, Z, 0, X, lam / eps ** 2, frozenset()),
        (2, Z, 1, Y, lam / eps ** 2, frozenset()),
        # ε⁻⁴ (2 + λ) ∂3w3 ∂3φ3
        (2, Z, 2, Z, params.compression / eps ** 4, frozenset()),
    ]
    # ε⁻² Σ_j (∂3w_j + ∂_j w3)(∂3φ_j + ∂_j φ3), 沿 j 与 y3 单点积分防止剪切闭锁
    for j in (0, 1):
        red = frozenset({j, Z})
        c = 1.0 / eps ** 2
        terms += [(j, Z, j, Z, c, red), (2, j, j, Z, c, red),
                  (j, Z, 2, j, c, red), (2, j, 2, j, c, red)]
    return terms


@dataclass
class AssembledSystem:
    """组装后的块: A (位移, 已消去侧边 Dirichlet 自由度), Mcpl (位移测试 × 压力),
    K = ε²K_h + K_v, Mass_p (未乘 γ)"""
    grid: Grid3D
    params: DimensionlessParams
    eps: float
    A: sp.csr_matrix
    Mcpl: sp.csr_matrix
    K_h: sp.csr_matrix
    K_v: sp.csr_matrix
    Mass_p: sp.csr_matrix
    free: np.ndarray
    face_mass: sp.csr_matrix
    lateral_mass: Tuple[sp.csr_matrix, sp.csr_matrix]
    mass_eigs_1d: Tuple[float, float, float]
    _factors: Dict[float, DirectFactorization] = field(default_factory=dict, repr=False)

    @property
    def K(self) -> sp.csr_matrix:
        return (self.K_h + self.K_v).tocsr()

    @property
    def n_w(self) -> int:
        return self.A.shape[0]

    @property
    def n_p(self) -> int:
        return self.Mass_p.shape[0]

    @property
    def mass_min_eig(self) -> float:
        """λ_min(Mass_p), 一维质量矩阵特征值之积"""
        return float(np.prod(self.mass_eigs_1d))

    def block_matrix(self, dt: float) -> sp.csr_matrix:
        a = self.params.alpha
        g = self.params.gamma
        return sp.bmat([[self.A, -a * self.Mcpl],
                        [-a * self.Mcpl.T, -(g * self.Mass_p + dt * self.K)]]).tocsr()

    def factorization(self, dt: float) -> DirectFactorization:
        if dt not in self._factors:
            self._factors[dt] = DirectFactorization(self.block_matrix(dt))
        return self._factors[dt]

    def traction_vector(self, loads: LoadSpec, t: float) -> np.ndarray:
        """𝓕: 上下表面力, 限制到自由位移自由度"""
        g2 = self.grid.base
        Y1, Y2 = g2.coords
        F = np.zeros((3,) + self.grid.shape)
        for j in range(3):
            for k, side in ((-1, 1), (0, -1)):
                P = loads.traction(j, Y1, Y2, side, t).ravel()
                F[j, k] += (self.face_mass @ P).reshape(g2.shape)
        return F.reshape(3, -1)[:, self.free].ravel()

    def flux_vector(self, loads: LoadSpec, t: float) -> np.ndarray:
        """𝓖: −Σ± (±U¹) ζ − ε ∫_侧面 V ζ"""
        g2 = self.grid.base
        Y1, Y2 = g2.coords
        G = np.zeros(self.grid.shape)
        U = (self.face_mass @ loads.flux_top_bottom(Y1, Y2, t).ravel()).reshape(g2.shape)
        G[-1] -= U
        G[0] += U
        mz_y, mz_x = self.lateral_mass
        y1, y2 = g2.y1, g2.y2
        for i, x0 in ((0, 0.0), (-1, 1.0)):
            V = loads.flux_lateral(np.full_like(y2, x0), y2, t)
            G[:, :, i] -= self.eps * (mz_y @ np.broadcast_to(V, (self.grid.nz + 1, y2.size)).ravel()
                                      ).reshape(self.grid.nz + 1, y2.size)
        for j, y0 in ((0, 0.0), (-1, 1.0)):
            V = loads.flux_lateral(y1, np.full_like(y1, y0), t)
            G[:, j, :] -= self.eps * (mz_x @ np.broadcast_to(V, (self.grid.nz + 1, y1.size)).ravel()
                                      ).reshape(self.grid.nz + 1, y1.size)
        return G.ravel()

    def to_state(self, x: np.ndarray, t: float) -> BiotState:
        w = np.zeros((3, self.grid.node_count))
        w[:, self.free] = x[:self.n_w].reshape(3, -1)
        return BiotState(Field(self.grid, w.reshape((3,) + self.grid.shape), LATERAL_DIRICHLET),
                         Field(self.grid, x[self.n_w:].reshape(self.grid.shape), FREE), t)

    def from_state(self, s: BiotState) -> Tuple[np.ndarray, np.ndarray]:
        w = s.w.values.reshape(3, -1)[:, self.free].ravel()
        return w, s.pi.values.ravel()

    def export(self, directory: Path) -> List[Path]:
        """Matrix Market 导出 A, Mcpl, K, Mass_p"""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        blocks = {"A": (self.A, True), "Mcpl": (self.Mcpl, False),
                  "K": (self.K, True), "Mass_p": (self.Mass_p, True)}
        paths = [SparseMatrix(M.tocsr(), sym).export(directory / f"{name}.mtx")
                 for name, (M, sym) in blocks.items()]
        logger.info(f"已导出组装矩阵到 {directory}")
        return paths


def assemble_biot(grid: Grid3D, params: DimensionlessParams, eps: Optional[float] = None) -> AssembledSystem:
    """三线性元组装缩放弱形式的全部项"""
    eps = params.eps if eps is None else eps
    if not eps > 0.0:
        raise ParameterError("eps", f"必须为正, 当前 {eps}")
    f1d = _Factors1D(grid)

    mask = np.broadcast_to(~grid.base.boundary_mask, grid.shape)
    free = np.flatnonzero(mask.ravel())

    blocks = [[None] * 3 for _ in range(3)]
    for c, a, d, b, coef, red in _elasticity_terms(params, eps):
        term = coef * f1d.form(a, b, red)[free][:, free]
        blocks[d][c] = term if blocks[d][c] is None else blocks[d][c] + term
    A = sp.bmat(blocks).tocsr()

    Mcpl = sp.vstack([f1d.form(None, X)[free], f1d.form(None, Y)[free],
                      f1d.form(None, Z)[free] / eps ** 2]).tocsr()
    Mass_p = f1d.form(None, None)
    K_h = (eps ** 2 * (f1d.form(X, X) + f1d.form(Y, Y))).tocsr()
    K_v = f1d.form(Z, Z)

    face_mass = sp.kron(f1d.mass[Y], f1d.mass[X]).tocsr()
    lateral_mass = (sp.kron(f1d.mass[Z], f1d.mass[Y]).tocsr(), sp.kron(f1d.mass[Z], f1d.mass[X]).tocsr())
    eigs = tuple(float(scipy.linalg.eigvalsh(m.toarray())[0]) for m in f1d.mass)

    logger.debug(f"Biot 组装: ε={eps}, 位移自由度 {A.shape[0]}, 压力自由度 {Mass_p.shape[0]}")
    return AssembledSystem(grid, params, eps, A, Mcpl, K_h, K_v, Mass_p, free,
                           face_mass, lateral_mass, eigs)


@dataclass
class BiotEnergyReport:
    step: int
    t: float
    elastic: float
    pressure: float
    dissipation: float
    numerical: float
    work: float
    coupling: float
    closure: float
    scale: float

    @property
    def relative_closure(self) -> float:
        return abs(self.closure) / self.scale if self.scale > 0.0 else 0.0


@dataclass
class APrioriQuantities:
    """‖e_i3‖/ε, ‖e33‖/ε², ‖∂3π‖, ε‖∇₂π‖ 以及可选的 ‖∂3π − ∂3π_w‖"""
    t: float
    shear: float
    compression: float
    vertical_gradient: float
    horizontal_gradient: float
    taber: Optional[float] = None


@dataclass
class BiotTrajectory:
    system: AssembledSystem
    states: List[BiotState]
    reports: List[BiotEnergyReport] = field(default_factory=list)
    apriori: List[APrioriQuantities] = field(default_factory=list)
    flagged: List[int] = field(default_factory=list)

    @property
    def eps(self) -> float:
        return self.system.eps

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def step_biot(sys: AssembledSystem, s: BiotState, loads: LoadSpec, t: float, dt: float,
              flagged: Optional[List[int]] = None, step: int = 0) -> BiotState:
    """向后 Euler 单步, 对称块系统, 分解按 dt 缓存"""
    if dt <= 0.0:
        raise LabError(f"dt 必须为正, 当前 {dt}")
    p = sys.params
    factor = sys.factorization(dt)
    w_old, pi_old = sys.from_state(s)
    F = sys.traction_vector(loads, t)
    G = sys.flux_vector(loads, t)
    rhs = np.concatenate([F, -dt * G - p.gamma * (sys.Mass_p @ pi_old) - p.alpha * (sys.Mcpl.T @ w_old)])
    x = factor.solve(rhs)
    res = factor.residual(x, rhs)
    bound = factor.residual_bound(x, rhs)
    if bound > 0.0 and res > STEP_RESIDUAL_TOL * bound:
        logger.warning(f"第 {step} 步残差 {res / bound:.3e} 超过阈值 {STEP_RESIDUAL_TOL}")
        if flagged is not None:
            flagged.append(step)
    return sys.to_state(x, t)


def apriori_quantities(s: BiotState, eps: float, limit_pi_w: Optional[np.ndarray] = None) -> APrioriQuantities:
    grid = s.w.grid
    W = grid.weights
    e = apply_diff(s.w, "strain_eij").values
    shear = np.sqrt(l2_norm(e[4], W) ** 2 + l2_norm(e[5], W) ** 2) / eps
    compression = l2_norm(e[2], W) / eps ** 2
    dz_pi = apply_diff(s.pi, "dz")[0]
    grad = apply_diff(s.pi, "grad2").values
    horizontal = eps * np.sqrt(l2_norm(grad[0], W) ** 2 + l2_norm(grad[1], W) ** 2)
    taber = None
    if limit_pi_w is not None:
        taber = l2_norm(dz_pi - np.gradient(limit_pi_w, grid.hz, axis=0, edge_order=2), W)
    return APrioriQuantities(s.t, float(shear), float(compression), l2_norm(dz_pi, W), float(horizontal), taber)


def energy_audit(sys: AssembledSystem, states: List[BiotState], loads: LoadSpec) -> List[BiotEnergyReport]:
    """向后 Euler 离散能量恒等式"""
    p = sys.params
    reports: List[BiotEnergyReport] = []
    for n in range(1, len(states)):
        old, new = states[n - 1], states[n]
        dt = new.t - old.t
        w0, p0 = sys.from_state(old)
        w1, p1 = sys.from_state(new)
        dw, dp = w1 - w0, p1 - p0
        e_old = 0.5 * float(w0 @ (sys.A @ w0)) + 0.5 * p.gamma * float(p0 @ (sys.Mass_p @ p0))
        elastic = 0.5 * float(w1 @ (sys.A @ w1))
        pressure = 0.5 * p.gamma * float(p1 @ (sys.Mass_p @ p1))
        dissipation = dt * float(p1 @ (sys.K @ p1))
        numerical = 0.5 * float(dw @ (sys.A @ dw)) + 0.5 * p.gamma * float(dp @ (sys.Mass_p @ dp))
        work = float(dw @ sys.traction_vector(loads, new.t)) + dt * float(p1 @ sys.flux_vector(loads, new.t))
        coupling = -p.alpha * float(dw @ (sys.Mcpl @ p1)) + p.alpha * float(p1 @ (sys.Mcpl.T @ dw))
        closure = (elastic + pressure - e_old) + dissipation + numerical + coupling - work
        scale = max(elastic + pressure, e_old, abs(work), dissipation, 1e-300)
        reports.append(BiotEnergyReport(n, new.t, elastic, pressure, dissipation, numerical,
                                        work, coupling, closure, scale))
    return reports


def run_biot(params: DimensionlessParams, grid: Grid3D, loads: LoadSpec, t_final: float,
             nsteps: int, eps: Optional[float] = None, limit=None,
             system: Optional[AssembledSystem] = None) -> BiotTrajectory:
    """完整三维轨迹; limit 为同一时间网格上的极限轨迹时附带 Taber 量"""
    eps = params.eps if eps is None else eps
    sys = system or assemble_biot(grid, params, eps)
    dt = t_final / nsteps
    state = BiotState.zero(grid)
    traj = BiotTrajectory(sys, [state])
    traj.apriori.append(apriori_quantities(state, eps, limit.states[0].pi_w if limit else None))
    logger.info(f"三维 Biot: ε={eps}, 网格 {grid.base.nx}²×{grid.nz}, 步数 {nsteps}")

    for n in range(1, nsteps + 1):
        t = n * dt
        try:
            state = step_biot(sys, state, loads, t, dt, traj.flagged, n)
        except Exception as e:
            logger.error(f"三维 Biot 第 {n} 步失败: {e}")
            raise SolverStepError(n, t, e) from e
        traj.states.append(state)
        pi_w = limit.states[n].pi_w if limit else None
        traj.apriori.append(apriori_quantities(state, eps, pi_w))

    traj.reports = energy_audit(sys, traj.states, loads)
    worst = max((r.relative_closure for r in traj.reports), default=0.0)
    logger.info(f"三维 Biot 完成 (ε={eps}): 最大相对能量闭合残差 {worst:.3e}")
    return traj


def coupling_min_eigenvalue(sys: AssembledSystem, tol: float = 1e-10) -> float:
    """λ_min(γ Mass_p + α² Mcplᵀ A⁻¹ Mcpl), 压力空间上的移位逆迭代

    H = [[A, α Mcpl], [α Mcplᵀ, −γ Mass_p + σI]] 解 H[x; y] = [0; −v] 给出 y = (T − σ)⁻¹ v。
    """
    p = sys.params
    n_w, n_p = sys.n_w, sys.n_p
    sigma = -0.5 * max(p.gamma * sys.mass_min_eig, 1e-12)
    H = sp.bmat([[sys.A, p.alpha * sys.Mcpl],
                 [p.alpha * sys.Mcpl.T, -p.gamma * sys.Mass_p + sigma * sp.identity(n_p)]])
    shifted = DirectFactorization(H)
    A_factor = DirectFactorization(sys.A)

    def inverse(v):
        return shifted.solve(np.concatenate([np.zeros(n_w), -v]))[n_w:]

    def apply_T(v):
        return p.gamma * (sys.Mass_p @ v) + p.alpha ** 2 * (sys.Mcpl.T @ A_factor.solve(sys.Mcpl @ v))

    T = spla.LinearOperator((n_p, n_p), matvec=apply_T, dtype=float)
    return min_eig_estimate(T, tol=tol, inverse=inverse, shift=sigma)


def coupling_spd_margin(sys: AssembledSystem, tol: float = 1e-10) -> float:
    """λ_min(γ Mass_p + α² Mcplᵀ A⁻¹ Mcpl) − γ λ_min(Mass_p)"""
    lam = coupling_min_eigenvalue(sys, tol)
    margin = lam - sys.params.gamma * sys.mass_min_eig
    logger.info(f"SPD 裕度: λ_min={lam:.6e}, 裕度={margin:.3e}")
    return margin


def mirror_state(s: BiotState) -> BiotState:
    """y3 ↦ −y3 反射: w̃ 偶, w3 奇, π 偶"""
    w = s.w.values[:, ::-1].copy()
    w[2] *= -1.0
    return BiotState(Field(s.w.grid, w, LATERAL_DIRICHLET), Field(s.pi.grid, s.pi.values[:, ::-1].copy(), FREE), s.t)

