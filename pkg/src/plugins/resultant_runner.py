"""
resultants: 合力与力矩、闭式一致性和平衡方程残差
"""
import asyncio
import logging
from typing import Dict, List, Tuple

import numpy as np

from ..core.domain.grid import FREE, Field, Grid2D, Grid3D
from ..core.domain.limit2d import run_limit
from ..core.domain.verify import (ResultantField, Verdict, at_least, at_most, equilibrium_residuals,
                                  kl_resultant_check, limit_resultants)
from ..core.plugin import Plugin, RunContext, RunResult
from .artifacts import write_field, write_table, write_verdicts

logger = logging.getLogger(__name__)

CLOSED_FORM_TOL = 1e-12
# 每次网格加密力矩平衡残差至少下降的倍数
MOMENT_RATIO = 3.0

RESULTANT_NAMES = ("N1", "N2", "N12", "M1", "M2", "M12", "N", "M", "Q1", "Q2", "f1", "f2", "m1", "m2")
RESIDUAL_KEYS = ("inplane1", "inplane2", "moment1", "moment2", "shear", "moment_equilibrium")


class ResultantRunnerPlugin(Plugin):
    """合力插件"""

    command = "resultants"

    def compute(self, ctx: RunContext) -> Tuple[Dict[str, float], List[Tuple[int, ResultantField, Dict[str, float]]]]:
        cfg = ctx.cfg
        closed = kl_resultant_check(ctx.grid, ctx.params)
        levels = []
        for n in cfg.verify.resultant_grids:
            grid = Grid3D(Grid2D.square(n), cfg.grid.nz)
            traj = run_limit(ctx.params, grid, ctx.loads, cfg.time.t_final, cfg.time.nsteps,
                             cfg.time.scheme, cfg.solver.cg_tol)
            final = traj.states[-1]
            res = limit_resultants(final, ctx.params, ctx.loads)
            residuals = equilibrium_residuals(res, ctx.loads, final.t, cfg.verify.interior_margin)
            logger.info(f"合力: n={n}, 力矩平衡残差 {residuals['moment_equilibrium']:.3e}")
            levels.append((n, res, residuals))
        return closed, levels

    async def run(self, ctx: RunContext) -> RunResult:
        try:
            closed, levels = await asyncio.to_thread(self.compute, ctx)
        except Exception as e:
            logger.error(f"合力计算失败: {e}")
            raise

        directory = ctx.directory("resultants")
        out = ctx.cfg.output
        result = RunResult(self.command)
        for n, res, _ in levels:
            f = Field(res.grid, np.stack([getattr(res, k) for k in RESULTANT_NAMES]), FREE)
            result.files += write_field(f, directory, f"resultants_n{n}", out.formats, ctx.header,
                                        RESULTANT_NAMES)
        result.files.append(write_table(
            directory / "residuals.csv", ctx.header, ("n",) + RESIDUAL_KEYS,
            [(n,) + tuple(r[k] for k in RESIDUAL_KEYS) for n, _, r in levels]))
        result.files.append(write_table(directory / "closed_form.csv", ctx.header, ("quantity", "relative_discrepancy"),
                                        sorted(closed.items())))

        result.verdicts = self.verdicts(closed, levels)
        result.files.append(write_verdicts(directory / "verdicts.txt", result.verdicts))
        return result

    @staticmethod
    def verdicts(closed: Dict[str, float], levels) -> List[Verdict]:
        verdicts = [at_most("resultants.closed_form", max(closed.values()), CLOSED_FORM_TOL)]
        moment = [r["moment_equilibrium"] for _, _, r in levels]
        for (n0, _, _), (n1, _, _), a, b in zip(levels, levels[1:], moment, moment[1:]):
            ratio = a / b if b > 0.0 else float("inf")
            verdicts.append(at_least(f"resultants.moment_equilibrium.n{n0}_n{n1}", ratio, MOMENT_RATIO))
        return verdicts
