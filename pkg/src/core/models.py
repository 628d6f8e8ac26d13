"""
运行配置数据模型
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .domain.loads import SCENARIOS
from .domain.params import NU_BAND

COMMANDS = ("solve-limit", "solve-3d", "sweep-epsilon", "mms", "resultants", "report")


def _check_nu_band(v: float) -> float:
    if not 0.0 < v < 0.5 - NU_BAND:
        raise ValueError(f"ν={v} 不在 (0, {0.5 - NU_BAND}) 内")
    return v


class PhysicalSection(BaseModel):
    """有量纲参数 (SI)"""
    G: float = Field(1.0, gt=0)
    nu: float = 0.25
    gammaG: float = Field(1.0, ge=0)
    alpha: float = Field(0.9, ge=0, le=1)
    k: float = Field(1.0, gt=0)
    eta: float = Field(1.0, gt=0)
    L: float = Field(1.0, gt=0)
    ell: float = Field(0.2, gt=0)

    @field_validator("nu")
    @classmethod
    def check_nu(cls, v: float) -> float:
        return _check_nu_band(v)

    @model_validator(mode="after")
    def check_thin(self):
        if not self.ell < self.L:
            raise ValueError("ell 必须小于 L")
        return self


class DimensionlessSection(BaseModel):
    eps: float = Field(0.1, gt=0, lt=0.5)
    gamma: float = Field(1.0, ge=0)
    nu: float = 0.25
    alpha: float = Field(0.9, ge=0, le=1)
    T_terzaghi: float = Field(1.0, gt=0)

    @field_validator("nu")
    @classmethod
    def check_nu(cls, v: float) -> float:
        return _check_nu_band(v)


class ParamsSection(BaseModel):
    physical: Optional[PhysicalSection] = None
    dimensionless: Optional[DimensionlessSection] = None
    d_char: float = Field(1.0, gt=0)


class GridSection(BaseModel):
    nx: int = Field(16, ge=8)
    nz: int = Field(8, ge=2)

    @field_validator("nz")
    @classmethod
    def check_even(cls, v: int) -> int:
        if v % 2:
            raise ValueError(f"nz 必须为偶数, 当前 {v}")
        return v


class TimeSection(BaseModel):
    t_final: float = Field(1.0, gt=0)
    nsteps: int = Field(50, ge=1)
    scheme: Literal["be", "cn"] = "be"


class ScenarioSection(BaseModel):
    name: str = "bend"
    amplitudes: Dict[str, float] = {}

    @field_validator("name")
    @classmethod
    def check_known(cls, v: str) -> str:
        if v not in SCENARIOS:
            raise ValueError(f"未知场景 {v}, 可选 {SCENARIOS}")
        return v


class SolverSection(BaseModel):
    cg_tol: float = Field(1e-10, gt=0)
    eig_tol: float = Field(1e-10, gt=0)
    export_matrices: bool = False


class SweepSection(BaseModel):
    eps: List[float] = [0.4, 0.2, 0.1, 0.05]
    workers: int = Field(1, ge=1)

    @field_validator("eps")
    @classmethod
    def check_decreasing(cls, v: List[float]) -> List[float]:
        if len(v) < 2:
            raise ValueError("至少需要两个 ε")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError(f"ε 序列必须严格递减: {v}")
        if any(not 0.0 < e < 0.5 for e in v):
            raise ValueError(f"ε 必须在 (0, 1/2) 内: {v}")
        return v


class MMSSection(BaseModel):
    grids: List[int] = [16, 32, 64]
    t_final: float = Field(0.0625, gt=0)
    dt_factor: float = Field(1.0, gt=0)
    temporal_grid: int = Field(32, ge=8)
    temporal_steps: List[int] = [4, 8, 16]
    temporal_t_final: float = Field(1.0, gt=0)

    @field_validator("grids", "temporal_steps")
    @classmethod
    def check_increasing(cls, v: List[int]) -> List[int]:
        if len(v) < 2 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"至少两个严格递增的值: {v}")
        return v


class VerifySection(BaseModel):
    interior_margin: float = Field(0.125, ge=0, lt=0.5)
    resultant_grids: List[int] = [16, 32]
    ratio: float = Field(0.5, gt=0)
    apriori_factor: float = Field(3.0, gt=1)

    @field_validator("resultant_grids")
    @classmethod
    def check_increasing(cls, v: List[int]) -> List[int]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"网格必须严格递增: {v}")
        return v


class OutputSection(BaseModel):
    root: str = "output"
    formats: List[Literal["csv", "vtk"]] = ["csv"]
    # 场文件每隔多少步输出一次
    every: int = Field(10, ge=1)


class LoggingSection(BaseModel):
    level: str = "INFO"


class RunConfig(BaseModel):
    command: Literal["solve-limit", "solve-3d", "sweep-epsilon", "mms", "resultants", "report"]
    eps: Optional[float] = Field(None, gt=0, lt=0.5)
    strict: bool = False
    params: ParamsSection = ParamsSection()
    grid: GridSection = GridSection()
    time: TimeSection = TimeSection()
    scenario: ScenarioSection = ScenarioSection()
    solver: SolverSection = SolverSection()
    sweep: SweepSection = SweepSection()
    mms: MMSSection = MMSSection()
    verify: VerifySection = VerifySection()
    output: OutputSection = OutputSection()
    logging: LoggingSection = LoggingSection()


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
    """校验配置, 错误以首个出错的点号键报告"""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(p) for p in first["loc"])
        raise ConfigError(key, first["msg"]) from e
