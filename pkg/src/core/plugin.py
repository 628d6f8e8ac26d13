"""
插件基类
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List

from .domain.grid import Grid2D, Grid3D
from .domain.loads import LoadSpec, build_scenario
from .domain.params import DimensionlessParams, params_from_config
from .domain.verify import Verdict
from .models import RunConfig

if TYPE_CHECKING:
    from .app import LabCore

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """一次命令执行的共享上下文"""
    cfg: RunConfig
    root: Path
    header: Dict[str, Any]

    @cached_property
    def params(self) -> DimensionlessParams:
        return params_from_config(self.cfg.params.model_dump(exclude_none=True))

    @cached_property
    def loads(self) -> LoadSpec:
        s = self.cfg.scenario
        return build_scenario(s.name, self.cfg.time.t_final, s.amplitudes)

    @cached_property
    def grid(self) -> Grid3D:
        return Grid3D(Grid2D.square(self.cfg.grid.nx), self.cfg.grid.nz)

    def directory(self, name: str) -> Path:
        path = self.root / name
        path.mkdir(parents=True, exist_ok=True)
        return path


@dataclass
class RunResult:
    command: str
    files: List[Path] = field(default_factory=list)
    verdicts: List[Verdict] = field(default_factory=list)

    @property
    def failed(self) -> List[Verdict]:
        return [v for v in self.verdicts if not v.passed]


class Plugin(ABC):
    """插件基类"""

    # 处理的子命令
    command: str = ""

    def __init__(self, core: 'LabCore'):
        self.core = core
        self.name = self.__class__.__name__.replace('Plugin', '').lower()

    async def initialize(self):
        """初始化插件（可选实现）"""
        pass

    @abstractmethod
    async def run(self, ctx: RunContext) -> RunResult:
        """执行子命令, 产物写入 ctx.root 下"""

    async def shutdown(self):
        """关闭插件（可选实现）"""
        pass
