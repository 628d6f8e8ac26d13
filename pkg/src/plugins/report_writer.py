"""
report: 汇总先前各命令的判定与收敛率
"""
import logging
from typing import List

from ..core.domain.verify import Verdict
from ..core.errors import LabError
from ..core.plugin import Plugin, RunContext, RunResult
from .artifacts import read_table, read_verdicts, write_table, write_verdicts

logger = logging.getLogger(__name__)


class ReportWriterPlugin(Plugin):
    """报告汇总插件"""

    command = "report"

    async def run(self, ctx: RunContext) -> RunResult:
        # 排除上一次的汇总本身
        sources = sorted(p for p in ctx.root.glob("*/verdicts.txt") if p.parent.name != "report")
        if not sources:
            raise LabError(f"{ctx.root} 下没有可汇总的判定文件")

        rows = []
        verdicts: List[Verdict] = []
        seen = set()
        for path in sources:
            for v in read_verdicts(path):
                rows.append((path.parent.name, v.criterion, "PASS" if v.passed else "FAIL", v.value, v.threshold))
                # sweep 的汇总已含各 ε 目录的判定
                if v.criterion not in seen:
                    seen.add(v.criterion)
                    verdicts.append(v)

        directory = ctx.directory("report")
        result = RunResult(self.command, verdicts=verdicts)
        result.files.append(write_table(directory / "summary.csv", ctx.header,
                                        ("source", "criterion", "status", "value", "threshold"), rows))

        rates = ctx.root / "sweep" / "rates.csv"
        if rates.exists():
            table = read_table(rates)
            rows = [(r["quantity"], r["eps_coarse"], r["eps_fine"], r["rate"]) for r in table]
            result.files.append(write_table(directory / "rates.csv", ctx.header,
                                            ("quantity", "eps_coarse", "eps_fine", "rate"), rows))

        result.files.append(write_verdicts(directory / "verdicts.txt", verdicts))
        logger.info(f"报告: {len(sources)} 个来源, {len(verdicts)} 项判定, "
                    f"失败 {len(result.failed)} 项")
        return result
