"""
制造解与收敛阶表
"""
import math

import numpy as np
import pytest

from src.core.domain.grid import Grid2D, Grid3D, column_moment
from src.core.domain.manufactured import (OrderTable, bending_exact, bending_sources, dtheta,
                                          membrane_error, membrane_exact, theta)
from src.plugins.mms_runner import order_verdicts


def test_membrane_order(params):
    coarse = membrane_error(16, params)
    fine = membrane_error(32, params)
    rate = math.log2(coarse / fine)
    assert 1.8 <= rate <= 2.5


def test_membrane_exact_vanishes_on_boundary():
    g = Grid2D.square(16)
    w1, w2 = membrane_exact(*g.coords)
    assert np.abs(w1[g.boundary_mask]).max() < 1e-15
    assert not w2.any()


def test_bending_exact_pressure_has_zero_column_mean():
    grid = Grid3D(Grid2D.square(8), 4)
    w, pi = bending_exact(grid, 0.5)
    assert np.abs(column_moment(pi, grid)).max() < 1e-14
    assert w.max() == pytest.approx(16.0 * (1.0 / 16.0) ** 2 * 0.25)


def test_bending_sources_vanish_at_start(params):
    grid = Grid3D(Grid2D.square(8), 4)
    sb, sp = bending_sources(grid, params)(0.0)
    assert not np.any(sb)
    assert not np.any(sp)
    assert sp.shape == grid.shape


def test_theta():
    assert theta(0.5) == 0.25
    assert dtheta(0.5) == 1.0


def test_order_table_rows():
    table = OrderTable("demo", [0.25, 0.125, 0.0625], {"u": [1.0, 0.25, 0.0625]})
    assert table.rates["u"] == [pytest.approx(2.0), pytest.approx(2.0)]
    rows = list(table.rows())
    assert len(rows) == 3
    assert rows[0] == ("u", 0.25, 1.0, None)
    assert rows[2][3] == pytest.approx(2.0)
    assert table.min_rate("u") == pytest.approx(2.0)


def test_order_verdicts():
    steps = [0.25, 0.125]
    membrane = OrderTable("membrane", steps, {"w_membrane": [1.0, 0.25]})
    spatial = OrderTable("bending-spatial", steps, {"w03": [1.0, 0.25], "pi_w": [1.0, 0.25]})
    temporal = OrderTable("bending-temporal", steps, {"w03": [1.0, 0.5], "pi_w": [1.0, 0.9]})
    verdicts = {v.criterion: v.passed for v in order_verdicts(membrane, spatial, temporal)}
    assert verdicts["mms.membrane.order_min"]
    assert verdicts["mms.membrane.order_max"]
    assert verdicts["mms.bending.spatial.pi_w"]
    assert verdicts["mms.bending.temporal.w03"]
    assert not verdicts["mms.bending.temporal.pi_w"]
