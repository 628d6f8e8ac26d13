"""
mms: 极限模型的制造解收敛阶
"""
import asyncio
import logging
from typing import List

from ..core.domain.manufactured import (OrderTable, bending_spatial_study, bending_temporal_study,
                                        membrane_study)
from ..core.domain.verify import Verdict, at_least, at_most
from ..core.plugin import Plugin, RunContext, RunResult
from .artifacts import write_table, write_verdicts

logger = logging.getLogger(__name__)

MEMBRANE_ORDER = (1.8, 2.5)
SPATIAL_ORDER = 1.8
TEMPORAL_ORDER = 0.8


def order_verdicts(membrane: OrderTable, spatial: OrderTable, temporal: OrderTable) -> List[Verdict]:
    rates = [r for r in membrane.rates["w_membrane"] if r is not None]
    verdicts = [
        at_least("mms.membrane.order_min", membrane.min_rate("w_membrane"), MEMBRANE_ORDER[0]),
        at_most("mms.membrane.order_max", max(rates) if rates else float("nan"), MEMBRANE_ORDER[1]),
    ]
    for key in ("w03", "pi_w"):
        verdicts.append(at_least(f"mms.bending.spatial.{key}", spatial.min_rate(key), SPATIAL_ORDER))
        verdicts.append(at_least(f"mms.bending.temporal.{key}", temporal.min_rate(key), TEMPORAL_ORDER))
    return verdicts


class MMSRunnerPlugin(Plugin):
    """制造解插件"""

    command = "mms"

    def studies(self, ctx: RunContext):
        m = ctx.cfg.mms
        params = ctx.params
        return (membrane_study(params, m.grids),
                bending_spatial_study(params, m.grids, m.t_final, m.dt_factor),
                bending_temporal_study(params, m.temporal_grid, m.temporal_steps, m.temporal_t_final))

    async def run(self, ctx: RunContext) -> RunResult:
        try:
            tables = await asyncio.to_thread(self.studies, ctx)
        except Exception as e:
            logger.error(f"制造解研究失败: {e}")
            raise

        directory = ctx.directory("mms")
        rows = [(t.name,) + row for t in tables for row in t.rows()]
        result = RunResult(self.command)
        result.files.append(write_table(directory / "orders.csv", ctx.header,
                                        ("study", "quantity", "step", "error", "rate"), rows))
        result.verdicts = order_verdicts(*tables)
        result.files.append(write_verdicts(directory / "verdicts.txt", result.verdicts))
        return result
