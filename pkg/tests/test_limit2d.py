"""
二维极限模型
"""
import numpy as np
import pytest

from src.core.domain.grid import Grid2D, Grid3D
from src.core.domain.limit2d import (BendingPressureStepper, LimitOperators, LimitState,
                                     bending_coupling_equivalence, lift_limit, membrane_matrix,
                                     run_limit, solve_membrane, step_bending_pressure,
                                     vertical_stiffness)
from src.core.domain.linsolve import SparseMatrix
from src.core.domain.loads import LoadSpec, build_scenario
from src.core.errors import LabError


def test_vertical_stiffness_kills_constants(grid):
    K = vertical_stiffness(grid)
    assert np.allclose(K @ np.ones(grid.nz + 1), 0.0)
    assert SparseMatrix(K).symmetry_defect() < 1e-14


def test_membrane_matrix_symmetric(params):
    K = membrane_matrix(Grid2D.square(8), params)
    assert SparseMatrix(K).symmetry_defect() < 1e-14


def test_zero_data_stays_zero(params, grid):
    traj = run_limit(params, grid, LoadSpec(), 1.0, 3)
    assert len(traj.states) == 4
    assert max(s.max_norm() for s in traj.states) <= 1e-12


@pytest.mark.parametrize("scheme", ["be", "cn"])
def test_energy_identity_closes(params, grid, scheme):
    loads = build_scenario("mixed", 1.0)
    traj = run_limit(params, grid, loads, 1.0, 5, scheme)
    assert len(traj.reports) == 5
    for r in traj.reports:
        assert r.relative_closure <= 1e-10
        assert abs(r.coupling_sum) <= 1e-12 * r.scale
        if scheme == "be":
            assert r.numerical >= -1e-14
        else:
            assert r.numerical == 0.0


def test_pressure_fluctuation_has_zero_column_mean(params, grid):
    traj = run_limit(params, grid, build_scenario("drain", 1.0), 1.0, 4)
    assert np.abs(traj.states[-1].pi_w).max() > 1e-6
    for s in traj.states:
        assert np.abs(s.column_mean()).max() <= 1e-12


def test_stretch_does_not_bend(params, grid):
    traj = run_limit(params, grid, build_scenario("stretch", 1.0), 1.0, 2)
    final = traj.states[-1]
    assert np.abs(final.w01).max() > 1e-6
    assert np.abs(final.w03).max() <= 1e-14
    assert np.abs(final.pi_w).max() <= 1e-14


def test_bend_is_driven_by_normal_load(params, grid):
    traj = run_limit(params, grid, build_scenario("bend", 1.0), 1.0, 2)
    final = traj.states[-1]
    # 上表面外法向面力为正, 中心挠度为正
    assert final.w03[grid.base.nx // 2, grid.base.nx // 2] > 0.0
    assert bending_coupling_equivalence(final) <= 1e-12 * max(1.0, np.abs(final.pi_m).max())


def test_membrane_zero_load():
    from src.core.domain.params import DimensionlessParams, lame_ratio
    p = DimensionlessParams(eps=0.1, gamma=1.0, lam=lame_ratio(0.3), alpha=0.5, nu=0.3)
    w1, w2, pi_m = solve_membrane(LoadSpec(), 0.5, p, Grid2D.square(8))
    assert not (w1.any() or w2.any() or pi_m.any())


def test_single_step_matches_stepper(params, grid):
    loads = build_scenario("bend", 1.0)
    s0 = LimitState.zero(grid)
    a = step_bending_pressure(s0, loads, 0.25, params)
    stepper = BendingPressureStepper(LimitOperators(grid, params), 0.25)
    b = stepper.step(s0, loads)
    assert a.t == b.t == 0.25
    assert np.array_equal(a.w03, b.w03)


def test_stepper_rejects_bad_input(params, grid):
    ops = LimitOperators(grid, params)
    with pytest.raises(LabError):
        BendingPressureStepper(ops, 0.0)
    with pytest.raises(LabError):
        BendingPressureStepper(ops, 0.1, "rk4")


def test_lift_shapes(params, grid):
    traj = run_limit(params, grid, build_scenario("mixed", 1.0), 1.0, 2)
    w, pi0 = lift_limit(traj.states[-1])
    assert w.shape == (3,) + grid.shape
    assert pi0.shape == grid.shape
    assert np.array_equal(w[2, 0], w[2, -1])


def test_trajectory_times(params):
    g = Grid3D(Grid2D.square(8), 2)
    traj = run_limit(params, g, LoadSpec(), 0.5, 5)
    assert np.allclose(traj.times, np.linspace(0.0, 0.5, 6))
