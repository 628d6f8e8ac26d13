"""
载荷描述与内置场景
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from ..errors import ConfigError

logger = logging.getLogger(__name__)

# P(y1, y2, side, t), side = +1 (Σ⁺) 或 -1 (Σ⁻)
FaceLoad = Callable[[np.ndarray, np.ndarray, int, float], np.ndarray]
# U1(y1, y2, t), V(y1, y2, t)
SurfaceFlux = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def _zero_face(y1, y2, side, t):
    return np.zeros(np.broadcast(y1, y2).shape)


def _zero_flux(y1, y2, t):
    return np.zeros(np.broadcast(y1, y2).shape)


def default_ramp(t_final: float) -> Callable[[float], float]:
    """sin²(πt/(2t₀)), t₀ = t_final/4, 之后恒为 1"""
    t0 = 0.25 * t_final

    def ramp(t: float) -> float:
        if t <= 0.0:
            return 0.0
        if t >= t0:
            return 1.0
        return float(np.sin(0.5 * np.pi * t / t0) ** 2)

    return ramp


@dataclass(frozen=True)
class LoadSpec:
    """表面力 P、上下表面通量 U¹、侧面通量 V

    P 为各表面的外法向面力; 初始压力恒为 0。
    """
    P1: FaceLoad = _zero_face
    P2: FaceLoad = _zero_face
    P3: FaceLoad = _zero_face
    U1: SurfaceFlux = _zero_flux
    V: SurfaceFlux = _zero_flux
    name: str = "zero"
    p_in: float = 0.0

    def traction(self, j: int, y1, y2, side: int, t: float) -> np.ndarray:
        fn = (self.P1, self.P2, self.P3)[j]
        return np.broadcast_to(np.asarray(fn(y1, y2, side, t), dtype=float),
                               np.broadcast(y1, y2).shape)

    def flux_top_bottom(self, y1, y2, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.U1(y1, y2, t), dtype=float),
                               np.broadcast(y1, y2).shape)

    def flux_lateral(self, y1, y2, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.V(y1, y2, t), dtype=float),
                               np.broadcast(y1, y2).shape)

    def tangential_sum(self, y1, y2, t: float):
        """(P̃⁺ + P̃⁻), 拉伸驱动"""
        return tuple(self.traction(j, y1, y2, 1, t) + self.traction(j, y1, y2, -1, t) for j in (0, 1))

    def tangential_moment(self, y1, y2, t: float):
        """Σ± (±1)·P̃, 弯曲驱动"""
        return tuple(self.traction(j, y1, y2, 1, t) - self.traction(j, y1, y2, -1, t) for j in (0, 1))

    def normal_sum(self, y1, y2, t: float) -> np.ndarray:
        return self.traction(2, y1, y2, 1, t) + self.traction(2, y1, y2, -1, t)


def mirrored(load: LoadSpec) -> LoadSpec:
    """y3 ↦ −y3 反射问题的载荷: 交换上下表面, P3 与 U¹ 变号"""
    def flip_tangential(fn):
        return lambda y1, y2, side, t: fn(y1, y2, -side, t)

    def flip_normal(fn):
        return lambda y1, y2, side, t: -np.asarray(fn(y1, y2, -side, t))

    return LoadSpec(
        P1=flip_tangential(load.P1),
        P2=flip_tangential(load.P2),
        P3=flip_normal(load.P3),
        U1=lambda y1, y2, t: -np.asarray(load.U1(y1, y2, t)),
        V=load.V,
        name=f"{load.name}-mirrored",
    )


DEFAULT_AMPLITUDES: Dict[str, float] = {
    "P3": 1.0,
    "P_tangential": 1.0,
    "P_shear": 0.5,
    "U1": 1.0,
    "V": 0.1,
}


def build_scenario(name: str, t_final: float = 1.0,
                   amplitudes: Optional[Mapping[str, float]] = None) -> LoadSpec:
    """按名称构造载荷场景"""
    amp = dict(DEFAULT_AMPLITUDES)
    amp.update(amplitudes or {})
    ramp = default_ramp(t_final)

    def bump(y1, y2):
        return np.sin(np.pi * y1) * np.sin(np.pi * y2)

    def bend_p3(y1, y2, side, t):
        # 全部法向载荷作用在上表面
        return amp["P3"] * bump(y1, y2) * ramp(t) * (1.0 if side > 0 else 0.0)

    def stretch_p1(y1, y2, side, t):
        return 0.5 * amp["P_tangential"] * np.sin(2.0 * np.pi * y1) * np.sin(np.pi * y2) * ramp(t)

    def stretch_p2(y1, y2, side, t):
        return 0.5 * amp["P_tangential"] * np.sin(np.pi * y1) * np.sin(2.0 * np.pi * y2) * ramp(t)

    def drain_u1(y1, y2, t):
        return amp["U1"] * bump(y1, y2) * ramp(t)

    def lateral_v(y1, y2, t):
        return amp["V"] * np.ones(np.broadcast(y1, y2).shape) * ramp(t)

    def shear_p1(y1, y2, side, t):
        # 上下表面反对称的切向力, 产生外力矩
        return stretch_p1(y1, y2, side, t) + 0.5 * side * amp["P_shear"] * bump(y1, y2) * ramp(t)

    if name == "zero":
        return LoadSpec(name="zero")
    if name == "bend":
        return LoadSpec(P3=bend_p3, name=name)
    if name == "stretch":
        return LoadSpec(P1=stretch_p1, P2=stretch_p2, name=name)
    if name == "drain":
        return LoadSpec(U1=drain_u1, name=name)
    if name == "mixed":
        return LoadSpec(P1=shear_p1, P2=stretch_p2, P3=bend_p3, U1=drain_u1, V=lateral_v, name=name)
    raise ConfigError("scenario.name", f"未知场景 {name}, 可选 {SCENARIOS}")


SCENARIOS = ("zero", "bend", "stretch", "drain", "mixed")
