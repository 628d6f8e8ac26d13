"""
二维孔隙弹性板极限模型: 膜问题 + 弯曲-压力耦合演化
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..errors import LabError, SolverStepError
from .grid import (CLAMPED, LATERAL_DIRICHLET, Grid2D, Grid3D, clamped_laplacian_matrix,
                   column_moment, horizontal_grad, partial)
from .linsolve import DirectFactorization, solve_cg
from .loads import LoadSpec
from .params import DimensionlessParams

logger = logging.getLogger(__name__)

MEAN_TOL = 1e-12
# 超过此值视为离散化错误, 而非舍入
MEAN_BUG_TOL = 1e-8

# 制造解源项: t -> (弯曲源 (2D 全节点), 压力源 (3D))
SourceFn = Callable[[float], Tuple[np.ndarray, np.ndarray]]
# 膜问题制造源项: t -> (f1, f2) 全节点
MembraneSourceFn = Callable[[float], Tuple[np.ndarray, np.ndarray]]


@dataclass
class LimitState:
    """极限模型状态"""
    grid: Grid3D
    w01: np.ndarray
    w02: np.ndarray
    pi_m: np.ndarray
    w03: np.ndarray
    pi_w: np.ndarray
    t: float = 0.0

    @classmethod
    def zero(cls, grid: Grid3D) -> "LimitState":
        g2 = grid.base.shape
        return cls(grid, np.zeros(g2), np.zeros(g2), np.zeros(g2), np.zeros(g2),
                   np.zeros(grid.shape), 0.0)

    @property
    def pi0(self) -> np.ndarray:
        """π⁰ = π_m + π_w"""
        return self.pi_m[None] + self.pi_w

    def column_mean(self) -> np.ndarray:
        return 0.5 * column_moment(self.pi_w, self.grid)

    def max_norm(self) -> float:
        return float(max(np.abs(a).max() for a in (self.w01, self.w02, self.pi_m, self.w03, self.pi_w)))


@dataclass
class EnergyReport:
    """单步离散能量平衡"""
    step: int
    t: float
    elastic: float
    pressure: float
    dissipation: float
    numerical: float
    work: float
    coupling_bending: float
    coupling_pressure: float
    closure: float
    scale: float

    @property
    def coupling_sum(self) -> float:
        return self.coupling_bending + self.coupling_pressure

    @property
    def relative_closure(self) -> float:
        return abs(self.closure) / self.scale if self.scale > 0.0 else 0.0


@dataclass
class LimitTrajectory:
    states: List[LimitState]
    operators: "LimitOperators"
    loads: LoadSpec
    scheme: str = "be"
    reports: List[EnergyReport] = field(default_factory=list)
    sources: Optional[SourceFn] = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


class LimitOperators:
    """极限模型的离散算子, 对给定网格与参数只构造一次"""

    def __init__(self, grid: Grid3D, params: DimensionlessParams):
        self.grid = grid
        self.params = params
        g2 = grid.base
        self.n_int = (g2.nx - 1) * (g2.ny - 1)
        self.n_all = g2.node_count
        self.n_pi = grid.node_count

        W2 = g2.weights.ravel()
        Wz = grid.simpson_weights
        self.W2 = W2
        self.L = clamped_laplacian_matrix(g2)
        self.Kb = (params.bending * (self.L.T @ sp.diags(W2) @ self.L)).tocsr()
        self.Wpi = sp.diags(np.kron(Wz, W2))
        Y = sp.kron(sp.csr_matrix(grid.y3[:, None]), sp.identity(self.n_all))
        self.C = (self.Wpi @ Y @ self.L).tocsr()
        self.K3 = sp.kron(vertical_stiffness(grid), sp.diags(W2)).tocsr()
        self.membrane = membrane_matrix(g2, params)

    def bending_energy(self, w_int: np.ndarray) -> float:
        return 0.5 * float(w_int @ (self.Kb @ w_int))

    def pressure_energy(self, pi: np.ndarray) -> float:
        return 0.5 * self.params.storage * float(pi @ (self.Wpi @ pi))

    def load_vector(self, loads: LoadSpec, t: float, source: Optional[np.ndarray] = None) -> np.ndarray:
        """弯曲方程右端: P₃⁺+P₃⁻ + div₂ Σ±(±P̃), 乘节点权"""
        g2 = self.grid.base
        Y1, Y2 = g2.coords
        m1, m2 = loads.tangential_moment(Y1, Y2, t)
        rhs = loads.normal_sum(Y1, Y2, t) + partial(m1, -1, g2.h) + partial(m2, -2, g2.h)
        if source is not None:
            rhs = rhs + source
        return (g2.weights * rhs)[1:-1, 1:-1].ravel()

    def flux_vector(self, loads: LoadSpec, t: float, source: Optional[np.ndarray] = None) -> np.ndarray:
        """压力方程右端: −Σ± (±U¹) ζ"""
        g2 = self.grid.base
        Y1, Y2 = g2.coords
        q = np.zeros(self.grid.shape)
        U = loads.flux_top_bottom(Y1, Y2, t) * g2.weights
        q[-1] -= U
        q[0] += U
        q = q.ravel()
        if source is not None:
            q = q + self.Wpi @ source.ravel()
        return q


def vertical_stiffness(grid: Grid3D) -> sp.csr_matrix:
    """竖直方向二次元刚度 (节点: 单元两端 + 中点), 与 Simpson 集中质量配套"""
    n = grid.nz + 1
    H = 2.0 * grid.hz
    local = np.array([[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]]) / (3.0 * H)
    rows, cols, vals = [], [], []
    for e in range(grid.nz // 2):
        idx = (2 * e, 2 * e + 1, 2 * e + 2)
        for a in range(3):
            for b in range(3):
                rows.append(idx[a])
                cols.append(idx[b])
                vals.append(local[a, b])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def membrane_matrix(g2: Grid2D, params: DimensionlessParams) -> sp.csr_matrix:
    """−Δw̃ − β∇div w̃ (π_m 已代数消去), 内部节点, 对称正定"""
    n = g2.nx - 1
    h = g2.h
    I = sp.identity(n)
    T = sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) / h ** 2
    D = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1]) / (2.0 * h)
    d11 = sp.kron(I, T)
    d22 = sp.kron(T, I)
    d12 = sp.kron(D, D)
    lap = d11 + d22
    beta = params.grad_div + params.coupling ** 2 / params.storage
    return sp.bmat([[-lap - beta * d11, -beta * d12],
                    [-beta * d12, -lap - beta * d22]]).tocsr()


def membrane_pressure(w01: np.ndarray, w02: np.ndarray, h: float, params: DimensionlessParams) -> np.ndarray:
    """π_m = −(α(1−2ν)/(1−ν))·div w̃⁰ / (γ + α²(1−2ν)/(2(1−ν)))"""
    div = partial(w01, -1, h, LATERAL_DIRICHLET) + partial(w02, -2, h, LATERAL_DIRICHLET)
    return -params.coupling * div / params.storage


def solve_membrane(loads: LoadSpec, t: float, params: DimensionlessParams, grid2: Grid2D,
                   tol: float = 1e-10, matrix: Optional[sp.csr_matrix] = None,
                   source: Optional[Tuple[np.ndarray, np.ndarray]] = None):
    """膜问题, 返回 (w01, w02, pi_m)"""
    K = membrane_matrix(grid2, params) if matrix is None else matrix
    Y1, Y2 = grid2.coords
    f1, f2 = loads.tangential_sum(Y1, Y2, t)
    f1, f2 = 0.5 * f1, 0.5 * f2
    if source is not None:
        f1, f2 = f1 + source[0], f2 + source[1]
    rhs = np.concatenate([grid2.interior(f1).ravel(), grid2.interior(f2).ravel()])
    x = solve_cg(K, rhs, tol=tol)
    n = (grid2.nx - 1) * (grid2.ny - 1)
    w01 = grid2.embed(x[:n].reshape(grid2.interior_shape))
    w02 = grid2.embed(x[n:].reshape(grid2.interior_shape))
    return w01, w02, membrane_pressure(w01, w02, grid2.h, params)


class BendingPressureStepper:
    """弯曲-压力耦合时间推进, 矩阵只分解一次

    未知量 [w03 (内部节点), π_w (全部节点 × 竖直节点)]:
        Kb w + c Cᵀ π = b
        c C w − (S W + θ dt K3) π = −dt q̄ − S W πⁿ + (1−θ) dt K3 πⁿ + c C wⁿ
    θ = 1 为向后 Euler, θ = 1/2 为 Crank–Nicolson。
    """

    def __init__(self, ops: LimitOperators, dt: float, scheme: str = "be"):
        if dt <= 0.0:
            raise LabError(f"dt 必须为正, 当前 {dt}")
        if scheme not in ("be", "cn"):
            raise LabError(f"未知时间格式: {scheme}")
        self.ops = ops
        self.dt = dt
        self.scheme = scheme
        self.theta = 1.0 if scheme == "be" else 0.5
        p = ops.params
        self.c = p.coupling
        self.S = p.storage
        self.pressure_block = (self.S * ops.Wpi + self.theta * dt * ops.K3).tocsr()
        block = sp.bmat([[ops.Kb, self.c * ops.C.T],
                         [self.c * ops.C, -self.pressure_block]]).tocsr()
        self.factor = DirectFactorization(block)
        logger.debug(f"弯曲-压力系统: n={block.shape[0]}, 格式={scheme}")

    def split(self, x: np.ndarray):
        return x[:self.ops.n_int], x[self.ops.n_int:]

    def step(self, s: LimitState, loads: LoadSpec, sources: Optional[SourceFn] = None) -> LimitState:
        ops = self.ops
        g2 = ops.grid.base
        t_new = s.t + self.dt
        sb_new, sp_new = sources(t_new) if sources else (None, None)
        b = ops.load_vector(loads, t_new, sb_new)
        q = ops.flux_vector(loads, t_new, sp_new)
        if self.theta < 1.0:
            sb_old, sp_old = sources(s.t) if sources else (None, None)
            q = self.theta * q + (1.0 - self.theta) * ops.flux_vector(loads, s.t, sp_old)

        w_old = g2.interior(s.w03).ravel()
        pi_old = s.pi_w.ravel()
        rhs_p = (-self.dt * q - self.S * (ops.Wpi @ pi_old)
                 + (1.0 - self.theta) * self.dt * (ops.K3 @ pi_old) + self.c * (ops.C @ w_old))
        x = self.factor.solve(np.concatenate([b, rhs_p]))
        w_int, pi = self.split(x)
        pi = pi.reshape(ops.grid.shape)

        drift = 0.5 * column_moment(pi, ops.grid)
        scale = max(1.0, float(np.abs(pi).max()))
        worst = float(np.abs(drift).max())
        if worst > MEAN_BUG_TOL * scale:
            raise LabError(f"π_w 列平均漂移 {worst:.3e}, 离散化错误")
        if worst > MEAN_TOL * scale:
            logger.debug(f"π_w 列平均舍入漂移 {worst:.3e}, 已投影")
        pi = pi - drift[None]

        return LimitState(ops.grid, s.w01, s.w02, s.pi_m,
                          g2.embed(w_int.reshape(g2.interior_shape)), pi, t_new)


def step_bending_pressure(s: LimitState, loads: LoadSpec, dt: float, params: DimensionlessParams,
                          stepper: Optional[BendingPressureStepper] = None,
                          sources: Optional[SourceFn] = None) -> LimitState:
    """单步弯曲-压力推进; 提供 stepper 时复用其分解"""
    if stepper is None:
        stepper = BendingPressureStepper(LimitOperators(s.grid, params), dt)
    return stepper.step(s, loads, sources)


def run_limit(params: DimensionlessParams, grid: Grid3D, loads: LoadSpec, t_final: float,
              nsteps: int, scheme: str = "be", tol: float = 1e-10,
              sources: Optional[SourceFn] = None,
              membrane_sources: Optional[MembraneSourceFn] = None) -> LimitTrajectory:
    """完整极限模型: 每个时间层解膜问题, 弯曲-压力按固定步长推进"""
    ops = LimitOperators(grid, params)
    dt = t_final / nsteps
    stepper = BendingPressureStepper(ops, dt, scheme)
    state = LimitState.zero(grid)
    traj = LimitTrajectory([state], ops, loads, scheme, sources=sources)
    logger.info(f"极限模型: 网格 {grid.base.nx}²×{grid.nz}, 步数 {nsteps}, dt={dt:.4g}, 格式={scheme}")

    for n in range(1, nsteps + 1):
        try:
            nxt = stepper.step(state, loads, sources)
            msrc = membrane_sources(nxt.t) if membrane_sources else None
            w01, w02, pi_m = solve_membrane(loads, nxt.t, params, grid.base, tol, ops.membrane, msrc)
            state = LimitState(grid, w01, w02, pi_m, nxt.w03, nxt.pi_w, nxt.t)
        except Exception as e:
            logger.error(f"极限模型第 {n} 步失败: {e}")
            raise SolverStepError(n, state.t + dt, e) from e
        traj.states.append(state)

    traj.reports = energy_audit(traj)
    worst = max((r.relative_closure for r in traj.reports), default=0.0)
    logger.info(f"极限模型完成: 最大相对能量闭合残差 {worst:.3e}")
    return traj


def energy_audit(traj: LimitTrajectory) -> List[EnergyReport]:
    """重建离散能量恒等式; 两个耦合项分别计算再求和"""
    ops = traj.operators
    g2 = ops.grid.base
    theta = 1.0 if traj.scheme == "be" else 0.5
    S = ops.params.storage
    c = ops.params.coupling
    reports: List[EnergyReport] = []

    for n in range(1, len(traj.states)):
        old, new = traj.states[n - 1], traj.states[n]
        dt = new.t - old.t
        w0 = g2.interior(old.w03).ravel()
        w1 = g2.interior(new.w03).ravel()
        p0 = old.pi_w.ravel()
        p1 = new.pi_w.ravel()
        dw = w1 - w0
        dp = p1 - p0
        p_bar = theta * p1 + (1.0 - theta) * p0

        src_new = traj.sources(new.t) if traj.sources else (None, None)
        src_old = traj.sources(old.t) if traj.sources else (None, None)
        b1 = ops.load_vector(traj.loads, new.t, src_new[0])
        q1 = ops.flux_vector(traj.loads, new.t, src_new[1])
        if theta < 1.0:
            b0 = ops.load_vector(traj.loads, old.t, src_old[0])
            q0 = ops.flux_vector(traj.loads, old.t, src_old[1])
            b_bar = 0.5 * (b0 + b1)
            q_bar = 0.5 * (q0 + q1)
        else:
            b_bar, q_bar = b1, q1

        e_old = ops.bending_energy(w0) + ops.pressure_energy(p0)
        elastic = ops.bending_energy(w1)
        pressure = ops.pressure_energy(p1)
        dissipation = dt * float(p_bar @ (ops.K3 @ p_bar))
        if theta == 1.0:
            numerical = ops.bending_energy(dw) + 0.5 * S * float(dp @ (ops.Wpi @ dp))
        else:
            numerical = 0.0
        work = float(dw @ b_bar) + dt * float(p_bar @ q_bar)
        coupling_bending = c * float(dw @ (ops.C.T @ p_bar))
        coupling_pressure = -c * float(p_bar @ (ops.C @ dw))
        closure = (elastic + pressure - e_old) + dissipation + numerical \
            + coupling_bending + coupling_pressure - work
        scale = max(elastic + pressure, e_old, abs(work), dissipation, 1e-300)
        reports.append(EnergyReport(n, new.t, elastic, pressure, dissipation, numerical, work,
                                    coupling_bending, coupling_pressure, closure, scale))
    return reports


def lift_limit(state: LimitState) -> Tuple[np.ndarray, np.ndarray]:
    """极限解的 Kirchhoff-Love 提升: (w, π⁰), w 形状 (3, nz+1, ny+1, nx+1)"""
    grid = state.grid
    d1, d2 = horizontal_grad(state.w03, grid.h, CLAMPED)
    z = grid.y3[:, None, None]
    w = np.stack([state.w01[None] - z * d1[None],
                  state.w02[None] - z * d2[None],
                  np.broadcast_to(state.w03, grid.shape)])
    return w, state.pi0


def bending_coupling_equivalence(state: LimitState) -> float:
    """max |∫y3 π⁰ − ∫y3 π_w|, π_m 被一阶矩消去"""
    grid = state.grid
    return float(np.abs(column_moment(state.pi0, grid, 1) - column_moment(state.pi_w, grid, 1)).max())
