"""
sweep-epsilon: 对一组 ε 求解三维问题, 与极限解比较并给出收敛率和判定
"""
import asyncio
import logging
from dataclasses import dataclass
from typing import Dict, List

from ..core.domain.biot3d import BiotTrajectory, coupling_spd_margin, run_biot
from ..core.domain.limit2d import LimitTrajectory, run_limit
from ..core.domain.verify import (NORM_KEYS, STRESS_KEYS, NormReport, StressReport,
                                  apriori_maxima, at_most, build_correctors, corrected_error_norms,
                                  estimate_rate, stress_error_norms, sweep_verdicts)
from ..core.plugin import Plugin, RunContext, RunResult
from .artifacts import write_table, write_verdicts
from .biot_runner import biot_directory, biot_verdicts, write_biot
from .limit_runner import limit_verdicts

logger = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-12

APRIORI_KEYS = ("shear", "compression", "vertical_gradient", "horizontal_gradient", "taber")


@dataclass
class SweepMember:
    """单个 ε 的结果"""
    eps: float
    trajectory: BiotTrajectory
    norms: NormReport
    stresses: StressReport
    apriori: Dict[str, float]
    consistency: float
    spd_margin: float


def solve_member(ctx: RunContext, limit: LimitTrajectory, eps: float) -> SweepMember:
    cfg = ctx.cfg
    params = ctx.params.with_eps(eps)
    traj = run_biot(params, ctx.grid, ctx.loads, cfg.time.t_final, cfg.time.nsteps, eps, limit)
    corr = build_correctors(limit, eps, ctx.grid)
    norms = corrected_error_norms(traj, limit, corr, eps)
    stresses = stress_error_norms(traj, limit, corr, eps)
    consistency = max(c.consistency(ctx.grid) for c in corr)
    margin = coupling_spd_margin(traj.system, cfg.solver.eig_tol)
    return SweepMember(eps, traj, norms, stresses, apriori_maxima(traj), consistency, margin)


class SweepRunnerPlugin(Plugin):
    """ε 扫描插件"""

    command = "sweep-epsilon"

    async def _member(self, ctx: RunContext, limit: LimitTrajectory, eps: float,
                      gate: asyncio.Semaphore) -> SweepMember:
        async with gate:
            logger.info(f"扫描: 开始 ε={eps}")
            try:
                member = await asyncio.to_thread(solve_member, ctx, limit, eps)
            except Exception as e:
                logger.error(f"扫描成员 ε={eps} 失败: {e}")
                raise
            logger.info(f"扫描: 完成 ε={eps}, e33/ε²={member.norms['e33_eps2']:.3e}, "
                        f"σ13={member.stresses['sigma13']:.3e}")
            return member

    async def run(self, ctx: RunContext) -> RunResult:
        cfg = ctx.cfg
        epsilons = list(cfg.sweep.eps)
        try:
            limit = await asyncio.to_thread(run_limit, ctx.params, ctx.grid, ctx.loads, cfg.time.t_final,
                                            cfg.time.nsteps, cfg.time.scheme, cfg.solver.cg_tol)
        except Exception as e:
            logger.error(f"扫描的极限模型求解失败: {e}")
            raise

        gate = asyncio.Semaphore(cfg.sweep.workers)
        # gather 保持输入顺序, 归约与完成顺序无关
        members: List[SweepMember] = await asyncio.gather(
            *(self._member(ctx, limit, eps, gate) for eps in epsilons))

        result = RunResult(self.command)
        zero_data = cfg.scenario.name == "zero"
        for m in members:
            directory = ctx.directory(biot_directory(m.eps))
            result.files += write_biot(ctx, m.trajectory, directory)
            member_verdicts = biot_verdicts(m.trajectory, zero_data, m.spd_margin)
            member_verdicts.append(at_most(f"corrector.eps{m.eps:g}.consistency", m.consistency,
                                           CONSISTENCY_TOL))
            result.files.append(write_verdicts(directory / "verdicts.txt", member_verdicts))
            result.verdicts += member_verdicts

        directory = ctx.directory("sweep")
        result.files += self._write_tables(ctx, directory, members)
        result.verdicts = limit_verdicts(limit, zero_data) + result.verdicts + sweep_verdicts(
            [m.norms for m in members], [m.stresses for m in members], [m.apriori for m in members],
            cfg.verify.ratio, cfg.verify.apriori_factor)
        result.files.append(write_verdicts(directory / "verdicts.txt", result.verdicts))
        return result

    def _write_tables(self, ctx: RunContext, directory, members: List[SweepMember]):
        header = ctx.header
        epsilons = [m.eps for m in members]
        files = [
            write_table(directory / "norms.csv", header, ("eps",) + NORM_KEYS,
                        [(m.eps,) + tuple(m.norms[k] for k in NORM_KEYS) for m in members]),
            write_table(directory / "stress.csv", header, ("eps",) + STRESS_KEYS,
                        [(m.eps,) + tuple(m.stresses[k] for k in STRESS_KEYS) for m in members]),
            write_table(directory / "apriori.csv", header, ("eps",) + APRIORI_KEYS,
                        [(m.eps,) + tuple(m.apriori.get(k) for k in APRIORI_KEYS) for m in members]),
        ]

        rows = []
        for label, keys, pick in (("norm", NORM_KEYS, lambda m, k: m.norms[k]),
                                  ("stress", STRESS_KEYS, lambda m, k: m.stresses[k])):
            for k in keys:
                rates = estimate_rate([pick(m, k) for m in members], epsilons)
                for i, rate in enumerate(rates):
                    rows.append((f"{label}.{k}", epsilons[i], epsilons[i + 1], rate))
        files.append(write_table(directory / "rates.csv", header,
                                 ("quantity", "eps_coarse", "eps_fine", "rate"), rows))
        return files
