"""
solve-limit: 二维极限模型轨迹与能量审计
"""
import asyncio
import logging
from pathlib import Path
from typing import List

import numpy as np

from ..core.domain.grid import FREE, Field
from ..core.domain.limit2d import LimitTrajectory, bending_coupling_equivalence, run_limit
from ..core.domain.verify import Verdict, at_least, at_most
from ..core.plugin import Plugin, RunContext, RunResult
from .artifacts import step_indices, write_field, write_table, write_verdicts

logger = logging.getLogger(__name__)

CLOSURE_TOL = 1e-10
NUMERICAL_TOL = -1e-14
COUPLING_TOL = 1e-12
MEAN_TOL = 1e-12
ZERO_TOL = 1e-12

ENERGY_COLUMNS = ("step", "t", "elastic", "pressure", "dissipation", "numerical", "work",
                  "coupling_bending", "coupling_pressure", "closure", "relative_closure")


def limit_verdicts(traj: LimitTrajectory, zero_data: bool = False) -> List[Verdict]:
    """能量闭合、耦合项抵消、π_w 竖向均值与 π⁰/π_w 一阶矩等价"""
    reports = traj.reports
    closure = max((r.relative_closure for r in reports), default=0.0)
    numerical = min((r.numerical for r in reports), default=0.0)
    coupling = max((abs(r.coupling_sum) / r.scale for r in reports), default=0.0)
    mean = max(float(np.abs(s.column_mean()).max()) for s in traj.states)
    scale = max(1.0, max(float(np.abs(s.pi_m).max()) for s in traj.states))
    equivalence = max(bending_coupling_equivalence(s) for s in traj.states) / scale

    verdicts = [
        at_most("energy.limit.closure", closure, CLOSURE_TOL),
        at_most("energy.limit.coupling", coupling, COUPLING_TOL),
        at_most("limit.mean_pressure", mean, MEAN_TOL),
        at_most("limit.pi_equivalence", equivalence, COUPLING_TOL),
    ]
    # CN 的数值耗散按定义为 0, 只对向后 Euler 判定
    if traj.scheme == "be":
        verdicts.insert(1, at_least("energy.limit.numerical_dissipation", numerical, NUMERICAL_TOL))
    if zero_data:
        verdicts.append(at_most("zero.limit", max(s.max_norm() for s in traj.states), ZERO_TOL))
    return verdicts


def write_limit(ctx: RunContext, traj: LimitTrajectory, directory: Path) -> List[Path]:
    """状态场 (按 output.every 抽样) 与能量表"""
    out = ctx.cfg.output
    grid = traj.operators.grid
    files: List[Path] = []
    for n in step_indices(len(traj.states) - 1, out.every):
        s = traj.states[n]
        mid = Field(grid.base, np.stack([s.w01, s.w02, s.pi_m, s.w03]), FREE)
        files += write_field(mid, directory, f"midsurface_{n:04d}", out.formats, ctx.header,
                             ["w01", "w02", "pi_m", "w03"])
        files += write_field(Field(grid, s.pi_w, FREE), directory, f"pi_w_{n:04d}", out.formats,
                             ctx.header, ["pi_w"])

    rows = [(r.step, r.t, r.elastic, r.pressure, r.dissipation, r.numerical, r.work,
             r.coupling_bending, r.coupling_pressure, r.closure, r.relative_closure)
            for r in traj.reports]
    files.append(write_table(directory / "energy.csv", ctx.header, ENERGY_COLUMNS, rows))
    return files


class LimitRunnerPlugin(Plugin):
    """极限模型求解插件"""

    command = "solve-limit"

    async def initialize(self):
        logger.debug("极限模型插件就绪")

    def solve(self, ctx: RunContext) -> LimitTrajectory:
        cfg = ctx.cfg
        return run_limit(ctx.params, ctx.grid, ctx.loads, cfg.time.t_final, cfg.time.nsteps,
                         cfg.time.scheme, cfg.solver.cg_tol)

    async def run(self, ctx: RunContext) -> RunResult:
        try:
            traj = await asyncio.to_thread(self.solve, ctx)
        except Exception as e:
            logger.error(f"极限模型求解失败: {e}")
            raise

        directory = ctx.directory("limit")
        result = RunResult(self.command)
        result.files += write_limit(ctx, traj, directory)
        result.verdicts = limit_verdicts(traj, ctx.cfg.scenario.name == "zero")
        result.files.append(write_verdicts(directory / "verdicts.txt", result.verdicts))
        return result
