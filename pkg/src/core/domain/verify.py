"""
校正场、收敛范数、应力偏差、合力与力矩、经验收敛率
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import GridError, LabError
from .grid import (CLAMPED, FREE, LATERAL_DIRICHLET, Field, Grid2D, Grid3D, apply_diff,
                   clamped_laplacian_matrix, column_moment, integrate_from_midplane, l2_norm,
                   laplacian_clamped, lift_kl, partial)
from .limit2d import LimitState, LimitTrajectory, lift_limit
from .loads import LoadSpec
from .params import DimensionlessParams

logger = logging.getLogger(__name__)

NORM_KEYS = ("e11", "e22", "e12", "e13_eps", "e23_eps", "e33_eps2",
             "kappa", "dz_kappa", "eps_grad_kappa", "disp1", "disp2", "disp3")
# 缩放板层厚度 (y3 ∈ (−1, 1))
SLAB_THICKNESS = 2.0

APRIORI_BOUNDED = ("shear", "compression", "vertical_gradient", "horizontal_gradient")

STRESS_KEYS = ("D_plus_2Estar", "sigma11", "sigma22", "sigma12",
               "sigma13", "sigma23", "sigma33",
               "D_plus_2Ecut", "sigma11_cut", "sigma22_cut")


def cutoff(grid: Grid2D, eps: float) -> np.ndarray:
    """Ψ_ε = s(min(dist/ε, 1)), s(t) = 6t⁵ − 15t⁴ + 10t³"""
    t = np.clip(grid.distance_to_boundary / eps, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


@dataclass
class CorrectorFields:
    """单个时间层的校正场"""
    t: float
    E_cor: np.ndarray
    E_star: np.ndarray
    E_star_from_cor: np.ndarray
    E0_cor: np.ndarray
    psi: np.ndarray
    Ecal: np.ndarray
    xi: Optional[np.ndarray] = None
    kappa: Optional[np.ndarray] = None

    def consistency(self, grid: Grid3D) -> float:
        """三种压缩校正表达式的最大相对差异, 另含 E* 沿厚度平均与 E_cor 之差

        E0_cor 由应变算子与夹紧 Laplace 矩阵独立组装, 与 E* 不共用中间量。
        """
        scale = max(1.0, float(np.abs(self.E_star).max()))
        mean = 0.5 * column_moment(self.E_star, grid)
        return float(max(np.abs(self.E_star - self.E_star_from_cor).max(),
                         np.abs(self.E_star - self.E0_cor).max(),
                         np.abs(mean - self.E_cor).max())) / scale


def build_corrector(state: LimitState, eps: float, params: DimensionlessParams) -> CorrectorFields:
    grid = state.grid
    h = grid.h
    nu = params.nu
    pi0 = state.pi0
    mean = 0.5 * column_moment(pi0, grid)
    div = partial(state.w01, -1, h, LATERAL_DIRICHLET) + partial(state.w02, -2, h, LATERAL_DIRICHLET)
    lap = laplacian_clamped(state.w03, h)
    z = grid.y3[:, None, None]

    E_cor = (params.alpha * (1.0 - 2.0 * nu) * mean - 2.0 * nu * div) / (2.0 * (1.0 - nu))
    # σ33 ≈ 0 给出的 ε⁻²∂3w3 极限
    E_star = (params.alpha * pi0 - params.lam * (div[None] - z * lap[None])) / params.compression
    E_from_cor = (E_cor[None] + nu * z * lap[None] / (1.0 - nu)
                  + params.alpha * (1.0 - 2.0 * nu) / (2.0 * (1.0 - nu)) * (pi0 - mean[None]))
    # 独立路径: 应变算子给 div, 稀疏矩阵给 Δw⁰₃
    w0 = Field(grid.base, np.stack([state.w01, state.w02]), LATERAL_DIRICHLET)
    strain = apply_diff(w0, "strain_eij").values
    lap_m = clamped_laplacian_matrix(grid.base) @ grid.base.interior(state.w03).ravel()
    lap_m = lap_m.reshape(grid.base.shape)
    E0 = (params.alpha * pi0 - params.lam * ((strain[0] + strain[1])[None] - z * lap_m[None])) / (2.0 + params.lam)

    psi = cutoff(grid.base, eps)
    Ecal = psi[None] * integrate_from_midplane(E_star, grid)
    return CorrectorFields(state.t, E_cor, E_star, E_from_cor, E0, psi, Ecal)


def build_correctors(limit: LimitTrajectory, eps: float, grid3: Grid3D) -> List[CorrectorFields]:
    """对极限轨迹的每个时间层构造校正场"""
    if limit.operators.grid != grid3:
        raise GridError("极限轨迹与三维网格不一致")
    params = limit.operators.params
    return [build_corrector(s, eps, params) for s in limit.states]


def corrected_lift(state: LimitState, corr: CorrectorFields, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """KL 提升加 ε²ℰ 的竖向修正, 即 ξ = 0, κ = 0 对应的三维场"""
    w, pi0 = lift_limit(state)
    w = w.copy()
    w[2] = w[2] + eps ** 2 * corr.Ecal
    return w, pi0.copy()


def corrected_unknowns(w: np.ndarray, pi: np.ndarray, state: LimitState, corr: CorrectorFields,
                       eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """ξ_j = w_j − w⁰_j + y3∂_jw⁰₃, ξ₃ = w₃ − w⁰₃ − ε²ℰ, κ = π − π⁰"""
    lifted, pi0 = lift_limit(state)
    xi = np.asarray(w) - lifted
    xi[2] = xi[2] - eps ** 2 * corr.Ecal
    return xi, np.asarray(pi) - pi0


def _states(traj):
    return traj.states if hasattr(traj, "states") else list(traj)


def _arrays(s) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(s, tuple):
        return s
    return s.w.values, s.pi.values[0]


def _check_times(biot_states, limit: LimitTrajectory, corr: Sequence[CorrectorFields]):
    if len(biot_states) != len(limit.states) or len(corr) != len(limit.states):
        raise LabError(f"时间层数不一致: {len(biot_states)} / {len(limit.states)} / {len(corr)}")
    for s, c in zip(biot_states, corr):
        t = s.t if hasattr(s, "t") else c.t
        if not math.isclose(t, c.t, rel_tol=1e-12, abs_tol=1e-14):
            raise LabError(f"时间网格不一致: {t} != {c.t}")


@dataclass
class NormReport:
    eps: float
    values: Dict[str, float]
    series: Dict[str, List[float]] = field(default_factory=dict)

    def __getitem__(self, key: str) -> float:
        return self.values[key]


@dataclass
class StressReport:
    eps: float
    values: Dict[str, float]
    series: Dict[str, List[float]] = field(default_factory=dict)

    def __getitem__(self, key: str) -> float:
        return self.values[key]


def _max_over_time(series: Dict[str, List[float]]) -> Dict[str, float]:
    return {k: float(max(v)) if v else 0.0 for k, v in series.items()}


def corrected_error_norms(biot, limit: LimitTrajectory, corr: Sequence[CorrectorFields],
                          eps: float) -> NormReport:
    """ξ(ε), κ(ε) 的各项范数, 取时间最大值

    biot 为三维轨迹, 或 (w, π) 数组对的序列。
    """
    states = _states(biot)
    _check_times(states, limit, corr)
    grid = limit.operators.grid
    W = grid.weights
    series: Dict[str, List[float]] = {k: [] for k in NORM_KEYS}

    for n, (s, ls) in enumerate(zip(states, limit.states)):
        w, pi = _arrays(s)
        xi, kappa = corrected_unknowns(w, pi, ls, corr[n], eps)
        corr[n].xi, corr[n].kappa = xi, kappa
        e = apply_diff(Field(grid, xi, FREE), "strain_eij").values
        dz = np.gradient(kappa, grid.hz, axis=0, edge_order=2)
        g1, g2 = partial(kappa, -1, grid.h), partial(kappa, -2, grid.h)
        values = {
            "e11": l2_norm(e[0], W),
            "e22": l2_norm(e[1], W),
            "e12": l2_norm(e[3], W),
            "e13_eps": l2_norm(e[4], W) / eps,
            "e23_eps": l2_norm(e[5], W) / eps,
            "e33_eps2": l2_norm(e[2], W) / eps ** 2,
            "kappa": l2_norm(kappa, W),
            "dz_kappa": l2_norm(dz, W),
            "eps_grad_kappa": eps * math.hypot(l2_norm(g1, W), l2_norm(g2, W)),
            "disp1": l2_norm(xi[0], W),
            "disp2": l2_norm(xi[1], W),
            "disp3": l2_norm(xi[2], W),
        }
        for k in NORM_KEYS:
            series[k].append(values[k])

    report = NormReport(eps, _max_over_time(series), series)
    logger.debug(f"ε={eps} 范数: " + ", ".join(f"{k}={v:.3e}" for k, v in report.values.items()))
    return report


def scaled_stress(w: np.ndarray, pi: np.ndarray, grid: Grid3D, params: DimensionlessParams,
                  eps: float) -> Dict[str, np.ndarray]:
    """σ(ε)/ε 各分量与 D(ε)"""
    e = apply_diff(Field(grid, w, FREE), "strain_eij").values
    lam = params.lam
    D = lam * (e[0] + e[1]) - params.alpha * pi + lam * e[2] / eps ** 2
    return {
        "D": D,
        "s11": 2.0 * e[0] + D,
        "s22": 2.0 * e[1] + D,
        "s12": 2.0 * e[3],
        "s13": e[4] / eps,
        "s23": e[5] / eps,
        "s33": 2.0 * e[2] / eps ** 2 + D,
    }


def _second(values: np.ndarray, a: int, b: int, h: float, bc: str = CLAMPED) -> np.ndarray:
    """∂_a∂_b, 先按边界标记求一阶导, 再作普通差分"""
    return partial(partial(values, a, h, bc), b, h, FREE)


def stress_error_norms(biot, limit: LimitTrajectory, corr: Sequence[CorrectorFields],
                       eps: float) -> StressReport:
    """五类应力偏差 (含 E* 与截断 Ψ·E* 两种对角修正), 取时间最大值"""
    states = _states(biot)
    _check_times(states, limit, corr)
    grid = limit.operators.grid
    params = limit.operators.params
    W = grid.weights
    h = grid.h
    z = grid.y3[:, None, None]
    series: Dict[str, List[float]] = {k: [] for k in STRESS_KEYS}

    for n, (s, ls) in enumerate(zip(states, limit.states)):
        w, pi = _arrays(s)
        c = corr[n]
        sig = scaled_stress(w, pi, grid, params, eps)
        e0 = apply_diff(Field(grid.base, np.stack([ls.w01, ls.w02]), LATERAL_DIRICHLET), "strain_eij").values
        d11 = _second(ls.w03, -1, -1, h)
        d22 = _second(ls.w03, -2, -2, h)
        d12 = _second(ls.w03, -1, -2, h)
        cut = c.psi[None] * c.E_star
        bend11 = -2.0 * e0[0][None] + 2.0 * z * d11[None]
        bend22 = -2.0 * e0[1][None] + 2.0 * z * d22[None]
        values = {
            "D_plus_2Estar": l2_norm(sig["D"] + 2.0 * c.E_star, W),
            "sigma11": l2_norm(sig["s11"] + bend11 + 2.0 * c.E_star, W),
            "sigma22": l2_norm(sig["s22"] + bend22 + 2.0 * c.E_star, W),
            "sigma12": l2_norm(sig["s12"] - 2.0 * e0[2][None] + 2.0 * z * d12[None], W),
            "sigma13": l2_norm(sig["s13"], W),
            "sigma23": l2_norm(sig["s23"], W),
            "sigma33": l2_norm(sig["s33"], W),
            "D_plus_2Ecut": l2_norm(sig["D"] + 2.0 * cut, W),
            "sigma11_cut": l2_norm(sig["s11"] + bend11 + 2.0 * cut, W),
            "sigma22_cut": l2_norm(sig["s22"] + bend22 + 2.0 * cut, W),
        }
        for k in STRESS_KEYS:
            series[k].append(values[k])

    return StressReport(eps, _max_over_time(series), series)


@dataclass
class ResultantField:
    """合力、力矩 (Simpson 求积) 及闭式表达式"""
    grid: Grid2D
    N1: np.ndarray
    N2: np.ndarray
    N12: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    M12: np.ndarray
    N: np.ndarray
    M: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    closed: Dict[str, np.ndarray] = field(default_factory=dict)
    rigidity: float = 0.0

    @classmethod
    def zeros(cls, grid: Grid2D, **fields) -> "ResultantField":
        names = ("N1", "N2", "N12", "M1", "M2", "M12", "N", "M", "Q1", "Q2", "f1", "f2", "m1", "m2")
        data = {k: np.asarray(fields.get(k, np.zeros(grid.shape)), dtype=float) for k in names}
        return cls(grid, **data)

    def discrepancy(self) -> Dict[str, float]:
        """闭式与求积的最大差异"""
        return {k: float(np.abs(v - getattr(self, k)).max()) for k, v in self.closed.items()}


def resultants_and_moments(w: Field, p: Field, params: DimensionlessParams,
                           deflection_bc: str = CLAMPED, loads: Optional[LoadSpec] = None,
                           t: float = 0.0) -> ResultantField:
    """平面应力本构 (G = 1) 下的合力与力矩, 缩放板层 ℓ = 2, x3 = y3

    求积: σ 由三维场的离散应变得到, 沿 y3 用 Simpson; 闭式: 中面位移与挠度的导数。
    """
    grid = w.grid
    if not isinstance(grid, Grid3D) or w.components != 3 or p.grid != grid:
        raise GridError("resultants_and_moments 需要同一三维网格上的 (w, p)")
    g2 = grid.base
    h = grid.h
    nu = params.nu
    c = params.coupling
    ell = SLAB_THICKNESS
    half = 0.5 * ell
    z = grid.y3[:, None, None]

    e = apply_diff(Field(grid, w.values, FREE), "strain_eij").values
    pv = p[0]
    s11 = (2.0 / (1.0 - nu)) * (e[0] + nu * e[1]) - c * pv
    s22 = (2.0 / (1.0 - nu)) * (e[1] + nu * e[0]) - c * pv
    s12 = 2.0 * e[3]

    def integral(values, power=0):
        return column_moment(values * z ** power, grid)

    res = ResultantField.zeros(g2)
    res.N1, res.N2, res.N12 = integral(s11), integral(s22), integral(s12)
    res.M1, res.M2, res.M12 = integral(s11, 1), integral(s22, 1), integral(s12, 1)
    res.N = -integral(pv)
    res.M = -integral(pv, 1)
    res.Q1, res.Q2 = integral(2.0 * e[4]), integral(2.0 * e[5])

    if loads is not None:
        Y1, Y2 = g2.coords
        res.f1, res.f2 = loads.tangential_sum(Y1, Y2, t)
        m1, m2 = loads.tangential_moment(Y1, Y2, t)
        res.m1, res.m2 = half * m1, half * m2

    mid = grid.mid
    u1, u2, deflection = w.values[0, mid], w.values[1, mid], w.values[2, mid]
    d1u1 = partial(u1, -1, h)
    d2u2 = partial(u2, -2, h)
    shear = partial(u1, -2, h) + partial(u2, -1, h)
    w11 = _second(deflection, -1, -1, h, deflection_bc)
    w22 = _second(deflection, -2, -2, h, deflection_bc)
    w12 = _second(deflection, -2, -1, h, deflection_bc)
    rigidity = flexural_rigidity(1.0, ell, nu)
    res.rigidity = rigidity
    res.closed = {
        "N1": (2.0 * ell / (1.0 - nu)) * (d1u1 + nu * d2u2) + c * res.N,
        "N2": (2.0 * ell / (1.0 - nu)) * (d2u2 + nu * d1u1) + c * res.N,
        "N12": ell * shear,
        "M12": -(ell ** 3 / 6.0) * w12,
        "M1": -rigidity * (w11 + nu * w22) + params.alpha * (1.0 - 2.0 * nu) / (1.0 - nu) * res.M,
        "M2": -rigidity * (w22 + nu * w11) + params.alpha * (1.0 - 2.0 * nu) / (1.0 - nu) * res.M,
    }
    return res


def flexural_rigidity(G: float, ell: float, nu: float) -> float:
    """D = Gℓ³/(6(1−ν))"""
    return G * ell ** 3 / (6.0 * (1.0 - nu))


def equilibrium_residuals(res: ResultantField, loads: Optional[LoadSpec] = None, t: float = 0.0,
                          margin: float = 0.125) -> Dict[str, float]:
    """面内平衡、力矩-剪力方程与力矩平衡方程的离散残差 (距边界 ≥ margin 的节点, L²)"""
    g2 = res.grid
    h = g2.h
    loads = loads or LoadSpec()
    Y1, Y2 = g2.coords
    f1, f2 = loads.tangential_sum(Y1, Y2, t)
    m1, m2 = loads.tangential_moment(Y1, Y2, t)
    m1, m2 = 0.5 * SLAB_THICKNESS * m1, 0.5 * SLAB_THICKNESS * m2
    p3 = loads.normal_sum(Y1, Y2, t)

    def d(values, axis):
        return partial(values, axis, h)

    residuals = {
        "inplane1": d(res.N1, -1) + d(res.N12, -2) + f1,
        "inplane2": d(res.N12, -1) + d(res.N2, -2) + f2,
        "moment1": d(res.M1, -1) + d(res.M12, -2) - res.Q1 + m1,
        "moment2": d(res.M12, -1) + d(res.M2, -2) - res.Q2 + m2,
        "shear": d(res.Q1, -1) + d(res.Q2, -2) + p3,
        "moment_equilibrium": (d(d(res.M1, -1), -1) + 2.0 * d(d(res.M12, -1), -2)
                               + d(d(res.M2, -2), -2) + d(m1, -1) + d(m2, -2) + p3),
    }
    mask = g2.distance_to_boundary >= margin - 1e-12
    weights = np.where(mask, g2.weights, 0.0)
    return {k: l2_norm(v, weights) for k, v in residuals.items()}


def limit_resultants(state: LimitState, params: DimensionlessParams, loads: Optional[LoadSpec] = None) -> ResultantField:
    """极限解的 KL 提升上的合力"""
    w, pi0 = lift_limit(state)
    grid = state.grid
    return resultants_and_moments(Field(grid, w, LATERAL_DIRICHLET), Field(grid, pi0, FREE),
                                  params, CLAMPED, loads, state.t)


def kl_resultant_check(grid: Grid3D, params: DimensionlessParams) -> Dict[str, float]:
    """KL 场 + y3 仿射压力: 闭式合力与求积的相对差异

    提升与闭式都用自由边界差分, 两者在离散层面逐项一致, 差异只剩舍入。
    """
    Y1, Y2 = grid.base.coords
    g = np.stack([0.3 * np.sin(np.pi * Y1) * np.sin(np.pi * Y2),
                  Y1 * Y2 * (1.0 - Y1),
                  16.0 * (Y1 * (1.0 - Y1)) ** 2 * (Y2 * (1.0 - Y2)) ** 2])
    w = lift_kl(Field(grid.base, g, FREE), grid)
    z = grid.y3[:, None, None]
    p = Field(grid, (1.0 + Y1)[None] + z * (Y2 ** 2)[None], FREE)
    res = resultants_and_moments(w, p, params, FREE)
    return {k: v / (1.0 + float(np.abs(getattr(res, k)).max())) for k, v in res.discrepancy().items()}


def estimate_rate(errors: Sequence[float], epsilons: Sequence[float]) -> List[Optional[float]]:
    """rate_i = log(e_i/e_{i+1}) / log(ε_i/ε_{i+1}); 非正误差给出 None"""
    if len(errors) != len(epsilons) or len(errors) < 2:
        raise LabError(f"长度不匹配或不足 2: {len(errors)} / {len(epsilons)}")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise LabError(f"ε 序列必须严格递减: {list(epsilons)}")
    rates: List[Optional[float]] = []
    for i in range(len(errors) - 1):
        a, b = errors[i], errors[i + 1]
        if not (a > 0.0 and b > 0.0) or not (math.isfinite(a) and math.isfinite(b)):
            rates.append(None)
            continue
        rates.append(math.log(a / b) / math.log(epsilons[i] / epsilons[i + 1]))
    return rates


@dataclass(frozen=True)
class Verdict:
    criterion: str
    passed: bool
    value: float
    threshold: float

    def line(self) -> str:
        return f"{self.criterion} {'PASS' if self.passed else 'FAIL'} {self.value:.6e} {self.threshold:.6e}"


def at_most(criterion: str, value: float, threshold: float) -> Verdict:
    return Verdict(criterion, bool(math.isfinite(value) and value <= threshold), float(value), float(threshold))


def at_least(criterion: str, value: float, threshold: float) -> Verdict:
    return Verdict(criterion, bool(math.isfinite(value) and value >= threshold), float(value), float(threshold))


def monotone_decrease(values: Sequence[float]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def sweep_verdicts(norms: Sequence[NormReport], stresses: Sequence[StressReport],
                   apriori: Sequence[Dict[str, float]], ratio: float = 0.5,
                   factor: float = 3.0) -> List[Verdict]:
    """ε 扫描的判定: 单调下降与末/首比值, 先验量有界, Kirchhoff 与 Taber 量下降"""
    verdicts: List[Verdict] = []
    for label, reports, keys in (("norm", norms, NORM_KEYS), ("stress", stresses, STRESS_KEYS)):
        for k in keys:
            seq = [r.values[k] for r in reports]
            first = seq[0]
            rel = seq[-1] / first if first > 0.0 else 0.0
            ok = monotone_decrease(seq) and rel <= ratio
            verdicts.append(Verdict(f"eps-convergence.{label}.{k}", ok, rel, ratio))

    if apriori:
        for k in APRIORI_BOUNDED:
            ref = apriori[0][k]
            seq = [a[k] for a in apriori]
            if ref > 0.0 and min(seq) > 0.0:
                rel = max(max(seq) / ref, ref / min(seq))
            else:
                rel = math.inf
            verdicts.append(at_most(f"apriori.{k}", rel, factor))

    kirchhoff = [max(s.values["sigma13"], s.values["sigma23"]) for s in stresses]
    verdicts.append(_decrease("kirchhoff.sigma_j3", kirchhoff))
    # ε‖∇₂π(ε)‖ 与 ‖∂3π(ε) − ∂3π_w‖ 各自随 ε 下降
    verdicts.append(_decrease("taber.horizontal", [a["horizontal_gradient"] for a in apriori]))
    if apriori and all("taber" in a for a in apriori):
        verdicts.append(_decrease("taber.vertical", [a["taber"] for a in apriori]))

    for v in verdicts:
        if not v.passed:
            logger.warning(f"判定失败: {v.line()}")
    return verdicts


def _decrease(criterion: str, seq: Sequence[float]) -> Verdict:
    """单调下降判定, 值为末项, 阈值为首项"""
    return Verdict(criterion, monotone_decrease(seq), seq[-1] if seq else 0.0, seq[0] if seq else 0.0)


def apriori_maxima(traj) -> Dict[str, float]:
    """三维轨迹先验量的时间最大值; 附带极限轨迹时含 Taber 量"""
    q = traj.apriori
    out = {k: max(getattr(a, k) for a in q) for k in APRIORI_BOUNDED}
    if q and all(a.taber is not None for a in q):
        out["taber"] = max(a.taber for a in q)
    return out
