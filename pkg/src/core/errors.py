"""
异常定义
"""
from typing import Optional


class LabError(Exception):
    """实验室异常基类"""


class ParameterError(LabError):
    """参数不在容许范围"""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConfigError(LabError):
    """配置解析失败"""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"配置项 {key}: {message}")


class GridError(LabError):
    """网格或场的形状不匹配"""


class LinearSolverError(LabError):
    """线性求解失败"""


class SingularMatrixError(LinearSolverError):
    """矩阵奇异"""


class ConvergenceError(LinearSolverError):
    """迭代未收敛"""

    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (残差={residual:.3e}, 迭代={iterations})")


class SPDViolationError(LinearSolverError):
    """检测到负曲率, 矩阵不是对称正定"""


class EigenvalueError(LinearSolverError):
    """特征值迭代未收敛"""


class SolverStepError(LabError):
    """时间步失败, 带步号上下文"""

    def __init__(self, step: int, t: float, cause: Optional[Exception] = None):
        self.step = step
        self.t = t
        self.cause = cause
        super().__init__(f"第 {step} 步 (t={t:.6g}) 失败: {cause}")
