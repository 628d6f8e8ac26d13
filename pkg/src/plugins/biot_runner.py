"""
solve-3d: 单个 ε 的三维 Biot 轨迹
"""
import asyncio
import logging
from pathlib import Path
from typing import List, Optional

from ..core.domain.biot3d import BiotTrajectory, coupling_spd_margin, run_biot
from ..core.domain.verify import Verdict, at_least, at_most
from ..core.plugin import Plugin, RunContext, RunResult
from .artifacts import step_indices, write_field, write_table, write_verdicts

logger = logging.getLogger(__name__)

CLOSURE_TOL = 1e-10
SPD_TOL = -1e-8
ZERO_TOL = 1e-12

ENERGY_COLUMNS = ("step", "t", "elastic", "pressure", "dissipation", "numerical", "work",
                  "coupling", "closure", "relative_closure")
APRIORI_COLUMNS = ("t", "shear", "compression", "vertical_gradient", "horizontal_gradient", "taber")


def biot_directory(eps: float) -> str:
    return f"biot_eps{eps:g}"


def biot_verdicts(traj: BiotTrajectory, zero_data: bool = False,
                  spd_margin: Optional[float] = None) -> List[Verdict]:
    tag = f"eps{traj.eps:g}"
    closure = max((r.relative_closure for r in traj.reports), default=0.0)
    verdicts = [
        at_most(f"energy.biot.{tag}.closure", closure, CLOSURE_TOL),
        at_most(f"biot.{tag}.flagged_steps", float(len(traj.flagged)), 0.0),
    ]
    if spd_margin is not None:
        verdicts.append(at_least(f"spd.{tag}.margin", spd_margin, SPD_TOL))
    if zero_data:
        verdicts.append(at_most(f"zero.biot.{tag}", max(s.max_norm() for s in traj.states), ZERO_TOL))
    return verdicts


def write_biot(ctx: RunContext, traj: BiotTrajectory, directory: Path) -> List[Path]:
    out = ctx.cfg.output
    files: List[Path] = []
    for n in step_indices(len(traj.states) - 1, out.every):
        s = traj.states[n]
        files += write_field(s.w, directory, f"w_{n:04d}", out.formats, ctx.header, ["w1", "w2", "w3"])
        files += write_field(s.pi, directory, f"pi_{n:04d}", out.formats, ctx.header, ["pi"])

    rows = [(r.step, r.t, r.elastic, r.pressure, r.dissipation, r.numerical, r.work,
             r.coupling, r.closure, r.relative_closure) for r in traj.reports]
    files.append(write_table(directory / "energy.csv", ctx.header, ENERGY_COLUMNS, rows))
    rows = [(a.t, a.shear, a.compression, a.vertical_gradient, a.horizontal_gradient, a.taber)
            for a in traj.apriori]
    files.append(write_table(directory / "apriori.csv", ctx.header, APRIORI_COLUMNS, rows))
    return files


class BiotRunnerPlugin(Plugin):
    """三维 Biot 求解插件"""

    command = "solve-3d"

    def solve(self, ctx: RunContext, eps: float):
        cfg = ctx.cfg
        params = ctx.params.with_eps(eps)
        traj = run_biot(params, ctx.grid, ctx.loads, cfg.time.t_final, cfg.time.nsteps, eps)
        margin = coupling_spd_margin(traj.system, cfg.solver.eig_tol)
        return traj, margin

    async def run(self, ctx: RunContext) -> RunResult:
        eps = ctx.cfg.eps if ctx.cfg.eps is not None else ctx.params.eps
        try:
            traj, margin = await asyncio.to_thread(self.solve, ctx, eps)
        except Exception as e:
            logger.error(f"三维求解失败 (ε={eps}): {e}")
            raise

        directory = ctx.directory(biot_directory(eps))
        result = RunResult(self.command)
        result.files += write_biot(ctx, traj, directory)
        if ctx.cfg.solver.export_matrices:
            result.files += traj.system.export(directory / "matrices")
        result.verdicts = biot_verdicts(traj, ctx.cfg.scenario.name == "zero", margin)
        result.files.append(write_verdicts(directory / "verdicts.txt", result.verdicts))
        return result
