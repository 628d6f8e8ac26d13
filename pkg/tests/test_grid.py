"""
网格、离散场与差分算子
"""
import numpy as np
import pytest

from src.core.domain.grid import (CLAMPED, FREE, Field, Grid2D, Grid3D, apply_diff,
                                  clamped_laplacian_matrix, column_moment, integrate_from_midplane,
                                  laplacian_clamped, lift_kl, moment_integrals, partial,
                                  restrict_to_midplane)
from src.core.errors import GridError


def test_grid_validation():
    with pytest.raises(GridError):
        Grid2D(8, 10)
    with pytest.raises(GridError):
        Grid2D.square(4)
    with pytest.raises(GridError):
        Grid3D(Grid2D.square(8), 3)


def test_y3_is_antisymmetric(grid):
    assert np.array_equal(grid.y3, -grid.y3[::-1])
    assert grid.y3[grid.mid] == 0.0


def test_simpson_weights_exact_for_cubics(grid):
    assert grid.simpson_weights.sum() == pytest.approx(2.0)
    z = grid.y3[:, None, None] * np.ones(grid.shape)
    assert np.allclose(column_moment(z ** 2, grid), 2.0 / 3.0)
    assert np.allclose(column_moment(z, grid, 1), 2.0 / 3.0)
    assert np.allclose(column_moment(z, grid), 0.0)


def test_moment_integrals_match_column_moment(grid):
    rng = np.random.default_rng(3)
    f = Field(grid, rng.standard_normal(grid.shape))
    for k in (0, 1):
        assert np.allclose(moment_integrals(f, k)[0], column_moment(f[0], grid, k))


def test_integrate_from_midplane_of_constant(grid):
    out = integrate_from_midplane(np.ones(grid.shape), grid)
    assert np.allclose(out, grid.y3[:, None, None] * np.ones(grid.shape))


def test_partial_exact_on_quadratics():
    g = Grid2D.square(8)
    Y1, Y2 = g.coords
    f = Y1 ** 2 + 3.0 * Y2
    assert np.allclose(partial(f, -1, g.h), 2.0 * Y1)
    assert np.allclose(partial(f, -2, g.h), 3.0)


def test_clamped_laplacian_matrix_matches_stencil():
    g = Grid2D.square(8)
    rng = np.random.default_rng(0)
    inner = rng.standard_normal(g.interior_shape)
    full = g.embed(inner)
    L = clamped_laplacian_matrix(g)
    assert np.allclose(L @ inner.ravel(), laplacian_clamped(full, g.h).ravel())


def test_field_validation(grid):
    with pytest.raises(GridError):
        Field(grid, np.zeros((3, 2, 2)))
    bad = np.zeros(grid.shape)
    bad[0, 0, 0] = np.nan
    with pytest.raises(GridError):
        Field(grid, bad)
    with pytest.raises(GridError):
        Field(grid, np.zeros(grid.shape), "periodic")


def test_apply_diff_unknown_and_mismatched(grid):
    f = Field(grid, np.zeros(grid.shape))
    with pytest.raises(GridError):
        apply_diff(f, "curl")
    with pytest.raises(GridError):
        apply_diff(f, "biharmonic2")


def test_biharmonic_requires_clamped():
    g = Grid2D.square(8)
    with pytest.raises(GridError):
        apply_diff(Field(g, np.zeros(g.shape), FREE), "biharmonic2")
    out = apply_diff(Field(g, np.zeros(g.shape), CLAMPED), "biharmonic2")
    assert out.values.shape == (1,) + g.shape


def test_kl_lift_has_no_transverse_shear(grid):
    Y1, Y2 = grid.base.coords
    g = Field(grid.base, np.stack([np.sin(Y1), Y1 * Y2, (Y1 * (1 - Y1) * Y2 * (1 - Y2)) ** 2]), FREE)
    w = lift_kl(g, grid)
    e = apply_diff(w, "strain_eij").values
    assert np.abs(e[4]).max() < 1e-10
    assert np.abs(e[5]).max() < 1e-10
    assert np.abs(e[2]).max() < 1e-12


def test_field_csv_has_provenance(tmp_path):
    g = Grid2D.square(8)
    f = Field(g, np.ones(g.shape))
    path = f.to_csv(tmp_path / "f.csv", {"grid": {"nx": 8}}, ["u"])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "y1,y2,u"
    assert len(lines) == 2 + g.node_count


def test_field_vtk(tmp_path, grid):
    f = Field(grid, np.zeros(grid.shape))
    text = f.to_vtk(tmp_path / "f.vtk", "pi").read_text(encoding="utf-8")
    assert "DIMENSIONS 9 9 5" in text
    assert f"POINT_DATA {grid.node_count}" in text


def test_midplane_restriction_inverts_lift(grid):
    Y1, Y2 = grid.base.coords
    g = Field(grid.base, np.stack([Y1, Y2 ** 2, Y1 * Y2]), FREE)
    mid = restrict_to_midplane(lift_kl(g, grid))
    assert mid.grid == grid.base
    np.testing.assert_allclose(mid.values, g.values, atol=1e-15)
    with pytest.raises(GridError):
        restrict_to_midplane(g)
