"""
物理参数与无量纲化
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping

from ..errors import ParameterError

logger = logging.getLogger(__name__)

# 不可压缩极限附近的排除带
NU_BAND = 1e-3


@dataclass(frozen=True)
class PhysicalParams:
    """有量纲参数 (SI 单位)"""
    G: float = 1.0
    nu: float = 0.25
    gammaG: float = 1.0
    alpha: float = 0.9
    k: float = 1.0
    eta: float = 1.0
    L: float = 1.0
    ell: float = 0.2


@dataclass(frozen=True)
class DimensionlessParams:
    """无量纲参数"""
    eps: float
    gamma: float
    lam: float
    alpha: float
    nu: float
    T_terzaghi: float = 1.0

    @property
    def coupling(self) -> float:
        """α(1−2ν)/(1−ν)"""
        return self.alpha * (1.0 - 2.0 * self.nu) / (1.0 - self.nu)

    @property
    def storage(self) -> float:
        """极限模型的有效储水系数 γ + α²(1−2ν)/(2(1−ν))"""
        return self.gamma + self.alpha ** 2 * (1.0 - 2.0 * self.nu) / (2.0 * (1.0 - self.nu))

    @property
    def bending(self) -> float:
        return 4.0 / (3.0 * (1.0 - self.nu))

    @property
    def grad_div(self) -> float:
        return (1.0 + self.nu) / (1.0 - self.nu)

    @property
    def compression(self) -> float:
        """2(1−ν)/(1−2ν), 即 2 + λ"""
        return 2.0 * (1.0 - self.nu) / (1.0 - 2.0 * self.nu)

    def with_eps(self, eps: float) -> "DimensionlessParams":
        return DimensionlessParams(eps=eps, gamma=self.gamma, lam=self.lam,
                                   alpha=self.alpha, nu=self.nu, T_terzaghi=self.T_terzaghi)

    def with_alpha(self, alpha: float) -> "DimensionlessParams":
        return DimensionlessParams(eps=self.eps, gamma=self.gamma, lam=self.lam,
                                   alpha=alpha, nu=self.nu, T_terzaghi=self.T_terzaghi)


def lame_ratio(nu: float) -> float:
    return 2.0 * nu / (1.0 - 2.0 * nu)


def _check_nu(nu: float, key: str = "nu"):
    if not (0.0 < nu < 0.5 - NU_BAND):
        raise ParameterError(key, f"ν={nu} 不在 (0, {0.5 - NU_BAND}) 内")


def derive_dimensionless(p: PhysicalParams) -> DimensionlessParams:
    """由有量纲参数得到无量纲参数"""
    for key in ("G", "k", "eta", "L", "ell"):
        value = getattr(p, key)
        if not value > 0.0:
            raise ParameterError(key, f"必须为正, 当前 {value}")
    if not p.ell < p.L:
        raise ParameterError("ell", f"板厚 {p.ell} 必须小于特征长度 {p.L}")
    _check_nu(p.nu)
    if p.gammaG < 0.0:
        raise ParameterError("gammaG", f"必须非负, 当前 {p.gammaG}")
    if not 0.0 <= p.alpha <= 1.0:
        raise ParameterError("alpha", f"必须在 [0, 1] 内, 当前 {p.alpha}")

    return DimensionlessParams(
        eps=p.ell / (2.0 * p.L),
        gamma=p.gammaG * p.G,
        lam=lame_ratio(p.nu),
        alpha=p.alpha,
        nu=p.nu,
        T_terzaghi=p.eta * p.ell ** 2 / (4.0 * p.k * p.G),
    )


def validate(d: DimensionlessParams) -> None:
    """按顺序检查不变量, 报告第一个违反项"""
    _check_nu(d.nu)
    if not 0.0 < d.eps < 0.5:
        raise ParameterError("eps", f"ε={d.eps} 不是薄板 (需 0 < ε < 1/2)")
    if d.gamma < 0.0:
        raise ParameterError("gamma", f"γ={d.gamma} 必须非负")
    if not 0.0 <= d.alpha <= 1.0:
        raise ParameterError("alpha", f"α={d.alpha} 必须在 [0, 1] 内")
    if not d.lam > 0.0:
        raise ParameterError("lambda", f"λ={d.lam} 必须为正")
    if not math.isclose(d.lam, lame_ratio(d.nu), rel_tol=1e-12, abs_tol=0.0):
        raise ParameterError("lambda", f"λ={d.lam} 与 2ν/(1−2ν)={lame_ratio(d.nu)} 不一致")
    if not d.T_terzaghi > 0.0:
        raise ParameterError("T_terzaghi", f"必须为正, 当前 {d.T_terzaghi}")


def characteristic_scales(p: PhysicalParams, d_char: float = 1.0) -> Dict[str, float]:
    """特征尺度, 仅用于记录"""
    long_time = p.eta * p.L ** 2 / (p.k * p.G)
    transverse_time = p.eta * p.ell ** 2 / (4.0 * p.k * p.G)
    return {
        "T_long": long_time,
        "T_terzaghi": transverse_time,
        "time_ratio": long_time / transverse_time,
        "d": d_char,
        "P": d_char * p.G / p.L,
    }


def params_from_config(section: Mapping[str, Any]) -> DimensionlessParams:
    """从配置段构造无量纲参数

    支持两种写法: ``physical`` (SI 单位, 经无量纲化) 或 ``dimensionless`` (eps, gamma, nu, alpha)。
    """
    if "dimensionless" in section and section["dimensionless"]:
        block = dict(section["dimensionless"])
        nu = float(block.get("nu", 0.25))
        _check_nu(nu)
        d = DimensionlessParams(
            eps=float(block.get("eps", 0.1)),
            gamma=float(block.get("gamma", 1.0)),
            lam=lame_ratio(nu),
            alpha=float(block.get("alpha", 0.9)),
            nu=nu,
            T_terzaghi=float(block.get("T_terzaghi", 1.0)),
        )
    else:
        block = dict(section.get("physical", {}))
        p = PhysicalParams(**{k: float(v) for k, v in block.items()})
        d = derive_dimensionless(p)
        scales = characteristic_scales(p, float(section.get("d_char", 1.0)))
        logger.info(
            f"特征尺度: T_long={scales['T_long']:.4g}s, T={scales['T_terzaghi']:.4g}s, "
            f"比值={scales['time_ratio']:.4g}, P={scales['P']:.4g}Pa")

    validate(d)
    logger.info(
        f"无量纲参数: ε={d.eps:.4g}, γ={d.gamma:.4g}, λ={d.lam:.4g}, "
        f"α={d.alpha:.4g}, ν={d.nu:.4g}, T={d.T_terzaghi:.4g}")
    return d
