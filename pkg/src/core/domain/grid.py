"""
张量积网格、离散场与差分算子
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_simpson, simpson

from ..errors import GridError

logger = logging.getLogger(__name__)

LATERAL_DIRICHLET = "lateral-Dirichlet"
FREE = "free"
CLAMPED = "clamped"
BC_TAGS = (LATERAL_DIRICHLET, FREE, CLAMPED)

# 有限差分算子
OPERATORS = ("grad2", "div2", "strain_eij", "dz", "biharmonic2")


@dataclass(frozen=True)
class Grid2D:
    """单位正方形 ω 上的均匀网格, 节点含边界"""
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx != self.ny:
            raise GridError(f"要求 nx = ny, 当前 {self.nx} != {self.ny}")
        if self.nx < 8:
            raise GridError(f"nx 至少为 8, 当前 {self.nx}")

    @classmethod
    def square(cls, n: int) -> "Grid2D":
        return cls(n, n)

    @property
    def h(self) -> float:
        return 1.0 / self.nx

    @property
    def shape(self):
        return (self.ny + 1, self.nx + 1)

    @property
    def interior_shape(self):
        return (self.ny - 1, self.nx - 1)

    @property
    def node_count(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @cached_property
    def y1(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx + 1)

    @cached_property
    def y2(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny + 1)

    @cached_property
    def coords(self):
        """(Y1, Y2), 形状 (ny+1, nx+1)"""
        Y2, Y1 = np.meshgrid(self.y2, self.y1, indexing="ij")
        return Y1, Y2

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    @cached_property
    def distance_to_boundary(self) -> np.ndarray:
        Y1, Y2 = self.coords
        return np.minimum(np.minimum(Y1, 1.0 - Y1), np.minimum(Y2, 1.0 - Y2))

    @cached_property
    def weights(self) -> np.ndarray:
        """梯形求积权"""
        wx = np.full(self.nx + 1, self.h)
        wx[[0, -1]] *= 0.5
        wy = np.full(self.ny + 1, self.h)
        wy[[0, -1]] *= 0.5
        return np.outer(wy, wx)

    def interior(self, values: np.ndarray) -> np.ndarray:
        return values[..., 1:-1, 1:-1]

    def embed(self, interior_values: np.ndarray) -> np.ndarray:
        """内部节点值扩展为全场, 边界取 0"""
        full = np.zeros(interior_values.shape[:-2] + self.shape)
        full[..., 1:-1, 1:-1] = interior_values
        return full


@dataclass(frozen=True)
class Grid3D:
    """Ω = ω × (−1, 1), nz 为偶数使 y3 = 0 为节点"""
    base: Grid2D
    nz: int

    def __post_init__(self):
        if self.nz < 2 or self.nz % 2:
            raise GridError(f"nz 必须为正偶数 (Simpson 配对), 当前 {self.nz}")

    @property
    def hz(self) -> float:
        return 2.0 / self.nz

    @property
    def h(self) -> float:
        return self.base.h

    @property
    def shape(self):
        return (self.nz + 1,) + self.base.shape

    @property
    def node_count(self) -> int:
        return (self.nz + 1) * self.base.node_count

    @property
    def mid(self) -> int:
        return self.nz // 2

    @cached_property
    def y3(self) -> np.ndarray:
        z = np.linspace(-1.0, 1.0, self.nz + 1)
        # 严格反对称
        return 0.5 * (z - z[::-1])

    @cached_property
    def coords(self):
        """(Y1, Y2, Y3), 形状 (nz+1, ny+1, nx+1)"""
        Y1, Y2 = self.base.coords
        shape = self.shape
        return (np.broadcast_to(Y1, shape), np.broadcast_to(Y2, shape),
                np.broadcast_to(self.y3[:, None, None], shape))

    @cached_property
    def simpson_weights(self) -> np.ndarray:
        w = np.full(self.nz + 1, 2.0)
        w[1::2] = 4.0
        w[[0, -1]] = 1.0
        return w * self.hz / 3.0

    @cached_property
    def weights(self) -> np.ndarray:
        """水平梯形 × 竖直 Simpson"""
        return self.simpson_weights[:, None, None] * self.base.weights[None, :, :]


@dataclass
class Field:
    """网格上的离散场, values 形状为 (分量数, *grid.shape)"""
    grid: Any
    values: np.ndarray
    bc: str = FREE

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == len(self.grid.shape):
            self.values = self.values[None]
        if self.values.shape[1:] != tuple(self.grid.shape):
            raise GridError(f"场形状 {self.values.shape[1:]} 与网格 {self.grid.shape} 不符")
        if self.bc not in BC_TAGS:
            raise GridError(f"未知边界标记: {self.bc}")
        if not np.all(np.isfinite(self.values)):
            raise GridError("场中含 NaN/Inf")

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @property
    def is_3d(self) -> bool:
        return isinstance(self.grid, Grid3D)

    def __getitem__(self, c: int) -> np.ndarray:
        return self.values[c]

    def to_csv(self, path: Path, header: Optional[Dict[str, Any]] = None,
               names: Optional[Sequence[str]] = None):
        """节点坐标 + 分量值"""
        names = list(names or [f"c{c}" for c in range(self.components)])
        coords = self.grid.coords
        cols = ["y1", "y2", "y3"][:len(coords)]
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as f:
            for line in provenance_lines(header):
                f.write(line + "\n")
            writer = csv.writer(f)
            writer.writerow(cols + names)
            flat = [np.ravel(np.asarray(c)) for c in coords] + [np.ravel(v) for v in self.values]
            for row in zip(*flat):
                writer.writerow([repr(float(x)) for x in row])
        return path

    def to_vtk(self, path: Path, name: str = "field"):
        """legacy ASCII VTK structured points"""
        g2 = self.grid.base if self.is_3d else self.grid
        nz = self.grid.nz + 1 if self.is_3d else 1
        dz = self.grid.hz if self.is_3d else 1.0
        z0 = -1.0 if self.is_3d else 0.0
        npts = g2.node_count * nz
        lines = [
            "# vtk DataFile Version 3.0",
            name,
            "ASCII",
            "DATASET STRUCTURED_POINTS",
            f"DIMENSIONS {g2.nx + 1} {g2.ny + 1} {nz}",
            f"ORIGIN 0 0 {z0}",
            f"SPACING {g2.h!r} {g2.h!r} {dz!r}",
            f"POINT_DATA {npts}",
        ]
        for c in range(self.components):
            lines.append(f"SCALARS {name}_{c} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(repr(float(x)) for x in np.ravel(self.values[c]))
        path = Path(path)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def provenance_lines(header: Optional[Dict[str, Any]]):
    if not header:
        return []
    text = json.dumps(header, sort_keys=True, ensure_ascii=False, default=str)
    return [f"# config: {text}"]


def _shifted(values: np.ndarray, axis: int, lo: int, hi: Optional[int]) -> np.ndarray:
    sl = [slice(None)] * values.ndim
    sl[axis] = slice(lo, hi)
    return values[tuple(sl)]


def partial(values: np.ndarray, axis: int, h: float, bc: str = FREE) -> np.ndarray:
    """一阶导数; 固支场在边界用镜像鬼点, 其余用二阶单侧闭合"""
    if bc == CLAMPED:
        pad = [(0, 0)] * values.ndim
        pad[axis] = (1, 1)
        fp = np.pad(values, pad, mode="reflect")
        return (_shifted(fp, axis, 2, None) - _shifted(fp, axis, 0, -2)) / (2.0 * h)
    return np.gradient(values, h, axis=axis, edge_order=2)


def laplacian_clamped(values: np.ndarray, h: float) -> np.ndarray:
    """五点 Laplace, 鬼点镜像 w = ∂w/∂n = 0, 在全部节点上取值"""
    pad = [(0, 0)] * (values.ndim - 2) + [(1, 1), (1, 1)]
    fp = np.pad(values, pad, mode="reflect")
    c = fp[..., 1:-1, 1:-1]
    return (fp[..., 1:-1, 2:] + fp[..., 1:-1, :-2] + fp[..., 2:, 1:-1] + fp[..., :-2, 1:-1] - 4.0 * c) / h ** 2


def laplacian_free(values: np.ndarray, h: float) -> np.ndarray:
    """内部五点 Laplace, 边界节点置零"""
    out = np.zeros_like(values)
    c = values[..., 1:-1, 1:-1]
    out[..., 1:-1, 1:-1] = (values[..., 1:-1, 2:] + values[..., 1:-1, :-2]
                            + values[..., 2:, 1:-1] + values[..., :-2, 1:-1] - 4.0 * c) / h ** 2
    return out


def biharmonic_clamped(values: np.ndarray, h: float) -> np.ndarray:
    """13 点双调和模板 (内部节点), 边界节点置零"""
    return laplacian_free(laplacian_clamped(values, h), h)


def clamped_laplacian_matrix(grid: Grid2D) -> sp.csr_matrix:
    """内部未知量 → 全部节点上的 Δw, 与 laplacian_clamped 一致"""
    def second_difference(n: int, h: float) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for i in range(n + 1):
            for j, coef in ((i - 1, 1.0), (i, -2.0), (i + 1, 1.0)):
                # 鬼点镜像
                if j == -1:
                    j = 1
                elif j == n + 1:
                    j = n - 1
                if 1 <= j <= n - 1:
                    rows.append(i)
                    cols.append(j - 1)
                    vals.append(coef / h ** 2)
        return sp.csr_matrix((vals, (rows, cols)), shape=(n + 1, n - 1))

    def embedding(n: int) -> sp.csr_matrix:
        return sp.csr_matrix((np.ones(n - 1), (np.arange(1, n), np.arange(n - 1))), shape=(n + 1, n - 1))

    Dx = second_difference(grid.nx, grid.h)
    Dy = second_difference(grid.ny, grid.h)
    return (sp.kron(embedding(grid.ny), Dx) + sp.kron(Dy, embedding(grid.nx))).tocsr()


def horizontal_grad(values: np.ndarray, h: float, bc: str = FREE):
    return partial(values, -1, h, bc), partial(values, -2, h, bc)


def apply_diff(f: Field, op: str) -> Field:
    """对离散场作用差分算子"""
    if op not in OPERATORS:
        raise GridError(f"未知算子: {op}")
    grid = f.grid
    h = grid.h

    if op == "grad2":
        if f.components != 1:
            raise GridError("grad2 只作用于标量场")
        g1, g2 = horizontal_grad(f[0], h, f.bc)
        return Field(grid, np.stack([g1, g2]), FREE)

    if op == "div2":
        if f.components < 2:
            raise GridError("div2 需要至少两个分量")
        div = partial(f[0], -1, h, f.bc) + partial(f[1], -2, h, f.bc)
        return Field(grid, div, FREE)

    if op == "strain_eij":
        if f.is_3d:
            if f.components != 3:
                raise GridError("三维应变需要三个分量")
            d = [[partial(f[c], ax, h, f.bc) for ax in (-1, -2)]
                 + [np.gradient(f[c], grid.hz, axis=0, edge_order=2)] for c in range(3)]
            e = [d[0][0], d[1][1], d[2][2],
                 0.5 * (d[0][1] + d[1][0]), 0.5 * (d[0][2] + d[2][0]), 0.5 * (d[1][2] + d[2][1])]
            # (e11, e22, e33, e12, e13, e23)
            return Field(grid, np.stack(e), FREE)
        if f.components < 2:
            raise GridError("二维应变需要两个分量")
        d11 = partial(f[0], -1, h, f.bc)
        d22 = partial(f[1], -2, h, f.bc)
        e12 = 0.5 * (partial(f[0], -2, h, f.bc) + partial(f[1], -1, h, f.bc))
        return Field(grid, np.stack([d11, d22, e12]), FREE)

    if op == "dz":
        if not f.is_3d:
            raise GridError("dz 只作用于三维场")
        return Field(grid, np.gradient(f.values, grid.hz, axis=1, edge_order=2), FREE)

    # biharmonic2
    if f.is_3d or f.components != 1:
        raise GridError("biharmonic2 只作用于二维标量场")
    if f.bc != CLAMPED:
        raise GridError("biharmonic2 要求固支场")
    return Field(grid, biharmonic_clamped(f[0], h), FREE)


def moment_integrals(f: Field, weight_power: int = 0) -> Field:
    """竖直方向复合 Simpson: ∫ y3^k f dy3"""
    if not f.is_3d or f.components != 1:
        raise GridError("moment_integrals 需要三维标量场")
    if weight_power not in (0, 1):
        raise GridError(f"weight_power 只能为 0 或 1, 当前 {weight_power}")
    grid = f.grid
    integrand = f[0] * grid.y3[:, None, None] ** weight_power
    return Field(grid.base, simpson(integrand, x=grid.y3, axis=0), FREE)


def column_moment(values: np.ndarray, grid: Grid3D, weight_power: int = 0) -> np.ndarray:
    """与 moment_integrals 相同的求积, 直接作用于数组"""
    w = grid.simpson_weights * grid.y3 ** weight_power
    return np.tensordot(w, values, axes=(0, 0))


def integrate_from_midplane(values: np.ndarray, grid: Grid3D) -> np.ndarray:
    """∫₀^{y3} f da, 由中面分别向上、向下累积 Simpson"""
    m = grid.mid
    out = np.zeros_like(values)
    upper = values[m:]
    out[m:] = cumulative_simpson(upper, dx=grid.hz, axis=0, initial=0.0)
    lower = values[:m + 1][::-1]
    out[:m + 1] = -cumulative_simpson(lower, dx=grid.hz, axis=0, initial=0.0)[::-1]
    return out


def restrict_to_midplane(f: Field) -> Field:
    if not f.is_3d:
        raise GridError("restrict_to_midplane 需要三维场")
    return Field(f.grid.base, f.values[:, f.grid.mid], f.bc if f.bc != LATERAL_DIRICHLET else FREE)


def lift_kl(g: Field, grid3: Grid3D) -> Field:
    """Kirchhoff-Love 提升: v_j = g_j − y3 ∂_j g3, v3 = g3"""
    if g.is_3d or g.components != 3:
        raise GridError("lift_kl 需要二维三分量场 (g1, g2, g3)")
    if g.grid != grid3.base:
        raise GridError("lift_kl: 水平网格不一致")
    d1, d2 = horizontal_grad(g[2], g.grid.h, g.bc)
    z = grid3.y3[:, None, None]
    v = np.stack([g[0][None] - z * d1[None], g[1][None] - z * d2[None],
                  np.broadcast_to(g[2], grid3.shape)])
    return Field(grid3, v, LATERAL_DIRICHLET)


def l2_norm(values: np.ndarray, weights: np.ndarray) -> float:
    """离散 L² 范数 (求积权)"""
    return float(np.sqrt(np.sum(weights * np.asarray(values) ** 2)))
