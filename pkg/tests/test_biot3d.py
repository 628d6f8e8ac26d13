"""
缩放三维 Biot 问题
"""
import numpy as np
import pytest
import scipy.linalg

from src.core.domain.biot3d import (BiotState, apriori_quantities, assemble_biot, coupling_spd_margin,
                                    mirror_state, run_biot, step_biot)
from src.core.domain.limit2d import run_limit
from src.core.domain.linsolve import SparseMatrix
from src.core.domain.loads import LoadSpec, build_scenario, mirrored
from src.core.domain.verify import apriori_maxima
from src.core.errors import LabError, ParameterError


@pytest.fixture
def system(params, grid):
    return assemble_biot(grid, params)


def test_blocks_are_symmetric(system):
    assert SparseMatrix(system.A).symmetry_defect() < 1e-12
    assert SparseMatrix(system.K).symmetry_defect() < 1e-12
    assert SparseMatrix(system.block_matrix(0.1)).symmetry_defect() < 1e-12


def test_block_sizes(system, grid):
    free_nodes = (grid.base.nx - 1) ** 2 * (grid.nz + 1)
    assert system.n_w == 3 * free_nodes
    assert system.n_p == grid.node_count
    assert system.Mcpl.shape == (system.n_w, system.n_p)


def test_mass_min_eig_is_kronecker_product(system):
    dense = scipy.linalg.eigvalsh(system.Mass_p.toarray())[0]
    assert system.mass_min_eig == pytest.approx(dense, rel=1e-10)


def test_invalid_eps(params, grid):
    with pytest.raises(ParameterError):
        assemble_biot(grid, params, eps=0.0)


def test_zero_data_stays_zero(params, grid):
    traj = run_biot(params, grid, LoadSpec(), 1.0, 3)
    assert max(s.max_norm() for s in traj.states) <= 1e-12
    assert not traj.flagged


def test_energy_identity_closes(params, grid):
    traj = run_biot(params, grid, build_scenario("mixed", 1.0), 1.0, 4)
    assert len(traj.reports) == 4
    for r in traj.reports:
        assert r.relative_closure <= 1e-10
        assert r.numerical >= -1e-14 * r.scale
        assert r.dissipation >= -1e-14 * r.scale


def test_mirror_symmetry(params, grid):
    loads = build_scenario("mixed", 1.0)
    a = run_biot(params, grid, loads, 1.0, 2).states[-1]
    b = run_biot(params, grid, mirrored(loads), 1.0, 2).states[-1]
    m = mirror_state(a)
    scale = a.max_norm()
    assert scale > 0.0
    assert np.abs(m.w.values - b.w.values).max() <= 1e-8 * scale
    assert np.abs(m.pi.values - b.pi.values).max() <= 1e-8 * scale


def test_step_rejects_nonpositive_dt(system, grid):
    with pytest.raises(LabError):
        step_biot(system, BiotState.zero(grid), LoadSpec(), 0.0, 0.0)


def test_factorization_cached(system):
    assert system.factorization(0.25) is system.factorization(0.25)


def test_spd_margin_nonnegative(system):
    assert coupling_spd_margin(system) >= -1e-8


def test_apriori_of_zero_state(grid):
    q = apriori_quantities(BiotState.zero(grid), 0.1)
    assert (q.shear, q.compression, q.vertical_gradient, q.horizontal_gradient) == (0.0, 0.0, 0.0, 0.0)
    assert q.taber is None


def test_apriori_with_limit_pressure(params, grid):
    traj = run_biot(params, grid, LoadSpec(), 1.0, 1)
    q = apriori_quantities(traj.states[-1], 0.2, np.zeros(grid.shape))
    assert q.taber == 0.0


def test_export_matrices(system, tmp_path):
    paths = system.export(tmp_path / "m")
    assert sorted(p.name for p in paths) == ["A.mtx", "K.mtx", "Mass_p.mtx", "Mcpl.mtx"]


def test_spd_margin_vanishes_without_coupling(params, grid):
    margin = coupling_spd_margin(assemble_biot(grid, params.with_alpha(0.0)))
    assert abs(margin) <= 1e-8


def test_taber_quantity_follows_limit_trajectory(params, grid):
    loads = build_scenario("mixed", 1.0)
    limit = run_limit(params, grid, loads, 1.0, 2)
    traj = run_biot(params, grid, loads, 1.0, 2, limit=limit)
    assert [a.t for a in traj.apriori] == pytest.approx(list(limit.times))
    assert all(a.taber is not None and np.isfinite(a.taber) for a in traj.apriori)
    assert traj.apriori[0].taber == 0.0
    assert traj.apriori[-1].taber > 0.0
    maxima = apriori_maxima(traj)
    assert maxima["taber"] == max(a.taber for a in traj.apriori)
    assert "taber" not in apriori_maxima(run_biot(params, grid, loads, 1.0, 2))
