"""
微核心运行器: 加载命令插件并分发
"""
import logging
import time
from pathlib import Path
from typing import Any, Dict

from .errors import LabError
from .models import RunConfig
from .plugin import Plugin, RunContext, RunResult

logger = logging.getLogger(__name__)


class LabCore:
    """微核心框架"""

    def __init__(self):
        self.plugins: Dict[str, Plugin] = {}
        self.commands: Dict[str, Plugin] = {}

    async def _startup(self):
        """启动插件"""
        logger.debug("启动计算核心...")
        await self._load_plugins()
        logger.debug(f"已加载 {len(self.plugins)} 个插件")

    async def _shutdown(self):
        """关闭插件"""
        for name, plugin in self.plugins.items():
            try:
                await plugin.shutdown()
            except Exception as e:
                logger.error(f"插件 {name} 关闭失败: {e}")
        self.plugins.clear()
        self.commands.clear()

    async def _load_plugins(self):
        """加载插件"""
        from ..plugins.limit_runner import LimitRunnerPlugin
        from ..plugins.biot_runner import BiotRunnerPlugin
        from ..plugins.sweep_runner import SweepRunnerPlugin
        from ..plugins.mms_runner import MMSRunnerPlugin
        from ..plugins.resultant_runner import ResultantRunnerPlugin
        from ..plugins.report_writer import ReportWriterPlugin

        plugins = [
            ("limit_runner", LimitRunnerPlugin),
            ("biot_runner", BiotRunnerPlugin),
            ("sweep_runner", SweepRunnerPlugin),
            ("mms_runner", MMSRunnerPlugin),
            ("resultant_runner", ResultantRunnerPlugin),
            ("report_writer", ReportWriterPlugin),
        ]

        for name, plugin_class in plugins:
            try:
                plugin = plugin_class(self)
                await plugin.initialize()
                self.plugins[name] = plugin
                self.commands[plugin.command] = plugin
                logger.debug(f"已加载插件: {name}")
            except Exception as e:
                logger.error(f"插件 {name} 加载失败: {e}")

    async def run(self, cfg: RunConfig, header: Dict[str, Any]) -> RunResult:
        """执行一个子命令; 产物根目录取 cfg.output.root"""
        await self._startup()
        try:
            plugin = self.commands.get(cfg.command)
            if plugin is None:
                raise LabError(f"命令 {cfg.command} 没有可用插件")
            root = Path(cfg.output.root)
            try:
                root.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                raise LabError(f"输出目录不可写: {root} ({e})") from e
            ctx = RunContext(cfg, root, header)
            logger.info(f"执行 {cfg.command} (插件 {plugin.name}), 输出 {root}")
            start = time.perf_counter()
            result = await plugin.run(ctx)
            logger.info(f"{cfg.command} 完成, 用时 {time.perf_counter() - start:.1f}s, "
                        f"文件 {len(result.files)} 个, 判定失败 {len(result.failed)} 项")
            return result
        finally:
            await self._shutdown()


# 全局核心实例
core = LabCore()
