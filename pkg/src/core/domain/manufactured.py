"""
制造解: 膜问题与弯曲-压力问题的解析场、源项和收敛阶研究
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .grid import Grid2D, Grid3D, l2_norm
from .limit2d import run_limit, solve_membrane
from .loads import LoadSpec
from .params import DimensionlessParams
from .verify import estimate_rate

logger = logging.getLogger(__name__)

PI = math.pi


@dataclass
class OrderTable:
    """收敛阶表: 每个量一列误差, 相邻两行给出一个阶"""
    name: str
    steps: List[float]
    errors: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def rates(self) -> Dict[str, List[Optional[float]]]:
        return {k: estimate_rate(v, self.steps) for k, v in self.errors.items()}

    def rows(self):
        """(量, 步长, 误差, 阶) 行, 首行的阶为空"""
        rates = self.rates
        for k, errs in self.errors.items():
            for i, (s, e) in enumerate(zip(self.steps, errs)):
                yield k, s, e, (rates[k][i - 1] if i > 0 else None)

    def min_rate(self, key: str) -> float:
        vals = [r for r in self.rates[key] if r is not None]
        return min(vals) if vals else float("nan")


# 膜问题: w̃* = (sin²(πy1) sin(2πy2), 0)

def membrane_exact(y1, y2):
    return np.sin(PI * y1) ** 2 * np.sin(2.0 * PI * y2), np.zeros(np.broadcast(y1, y2).shape)


def membrane_source(y1, y2, params: DimensionlessParams):
    """f = −Δw̃* − (κ + c²/S)∇div w̃*"""
    beta = params.grad_div + params.coupling ** 2 / params.storage
    a = np.sin(PI * y1) ** 2
    da = PI * np.sin(2.0 * PI * y1)
    dda = 2.0 * PI ** 2 * np.cos(2.0 * PI * y1)
    b = np.sin(2.0 * PI * y2)
    db = 2.0 * PI * np.cos(2.0 * PI * y2)
    ddb = -4.0 * PI ** 2 * b
    f1 = -(dda * b + a * ddb) - beta * dda * b
    f2 = -beta * da * db
    return f1, f2


def membrane_error(n: int, params: DimensionlessParams, tol: float = 1e-12) -> float:
    grid = Grid2D.square(n)
    Y1, Y2 = grid.coords
    w1, w2, _ = solve_membrane(LoadSpec(), 0.0, params, grid, tol, source=membrane_source(Y1, Y2, params))
    e1, e2 = membrane_exact(Y1, Y2)
    return math.hypot(l2_norm(w1 - e1, grid.weights), l2_norm(w2 - e2, grid.weights))


def membrane_study(params: DimensionlessParams, grids: Sequence[int] = (16, 32, 64)) -> OrderTable:
    table = OrderTable("membrane", [1.0 / n for n in grids], {"w_membrane": []})
    for n in grids:
        err = membrane_error(n, params)
        table.errors["w_membrane"].append(err)
        logger.info(f"膜问题制造解: n={n}, L² 误差 {err:.3e}")
    return table


# 弯曲-压力: w03* = 16 a(y1) a(y2) θ(t), π_w* = (y3³/3 − y3) q(y1, y2) θ(t), θ = t²

def _a(s):
    return s ** 2 * (1.0 - s) ** 2


def _dda(s):
    return 2.0 - 12.0 * s + 12.0 * s ** 2


def theta(t: float) -> float:
    return t * t


def dtheta(t: float) -> float:
    return 2.0 * t


def bending_exact(grid: Grid3D, t: float):
    Y1, Y2 = grid.base.coords
    w = 16.0 * _a(Y1) * _a(Y2) * theta(t)
    z = grid.y3[:, None, None]
    q = np.sin(PI * Y1) * np.sin(PI * Y2)
    pi = (z ** 3 / 3.0 - z) * q[None] * theta(t)
    return w, pi


def bending_sources(grid: Grid3D, params: DimensionlessParams):
    """返回 t -> (弯曲源, 压力源)"""
    Y1, Y2 = grid.base.coords
    z = grid.y3[:, None, None]
    c = params.coupling
    S = params.storage
    q = np.sin(PI * Y1) * np.sin(PI * Y2)
    bih = 16.0 * (24.0 * _a(Y2) + 2.0 * _dda(Y1) * _dda(Y2) + 24.0 * _a(Y1))
    lap = 16.0 * (_dda(Y1) * _a(Y2) + _a(Y1) * _dda(Y2))
    # Δ ∫ y3 π* dy3 = (−8/15)(−2π²) q
    lap_moment = (16.0 * PI ** 2 / 15.0) * q

    def sources(t: float):
        sb = (params.bending * bih + c * lap_moment) * theta(t)
        sp_ = (S * (z ** 3 / 3.0 - z) * q[None] * dtheta(t)
               - 2.0 * z * q[None] * theta(t)
               - c * z * lap[None] * dtheta(t))
        return sb, sp_

    return sources


def bending_errors(n: int, nz: int, nsteps: int, t_final: float, params: DimensionlessParams) -> Dict[str, float]:
    grid = Grid3D(Grid2D.square(n), nz)
    traj = run_limit(params, grid, LoadSpec(), t_final, nsteps, sources=bending_sources(grid, params))
    final = traj.states[-1]
    w, pi = bending_exact(grid, final.t)
    return {
        "w03": l2_norm(final.w03 - w, grid.base.weights),
        "pi_w": l2_norm(final.pi_w - pi, grid.weights),
    }


def bending_spatial_study(params: DimensionlessParams, grids: Sequence[int] = (16, 32, 64),
                          t_final: float = 0.0625, dt_factor: float = 1.0) -> OrderTable:
    """dt = dt_factor·h², nz = n/2"""
    table = OrderTable("bending-spatial", [1.0 / n for n in grids], {"w03": [], "pi_w": []})
    for n in grids:
        nsteps = max(1, int(math.ceil(t_final / (dt_factor / n ** 2) - 1e-9)))
        errs = bending_errors(n, n // 2, nsteps, t_final, params)
        for k, v in errs.items():
            table.errors[k].append(v)
        logger.info(f"弯曲-压力制造解 (空间): n={n}, 步数 {nsteps}, 误差 {errs}")
    return table


def bending_temporal_study(params: DimensionlessParams, n: int = 32, steps: Sequence[int] = (4, 8, 16),
                           t_final: float = 1.0) -> OrderTable:
    table = OrderTable("bending-temporal", [t_final / s for s in steps], {"w03": [], "pi_w": []})
    for s in steps:
        errs = bending_errors(n, n // 2, s, t_final, params)
        for k, v in errs.items():
            table.errors[k].append(v)
        logger.info(f"弯曲-压力制造解 (时间): 步数 {s}, 误差 {errs}")
    return table
