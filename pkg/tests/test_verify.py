"""
校正场、收敛范数、合力与判定
"""
import math
from dataclasses import replace

import numpy as np
import pytest

from src.core.domain.grid import Grid2D, Grid3D
from src.core.domain.limit2d import run_limit
from src.core.domain.loads import LoadSpec, build_scenario
from src.core.domain.verify import (NORM_KEYS, STRESS_KEYS, NormReport, ResultantField, StressReport,
                                    Verdict, at_least, at_most, build_correctors, corrected_error_norms,
                                    corrected_lift, cutoff, equilibrium_residuals, estimate_rate,
                                    flexural_rigidity, kl_resultant_check, limit_resultants,
                                    monotone_decrease, stress_error_norms, sweep_verdicts)
from src.core.errors import GridError, LabError


@pytest.fixture
def limit(params, grid):
    return run_limit(params, grid, build_scenario("mixed", 1.0), 1.0, 3)


def test_cutoff_range():
    g = Grid2D.square(16)
    psi = cutoff(g, 0.1)
    assert psi[g.boundary_mask].max() == 0.0
    assert psi[8, 8] == 1.0
    assert psi.min() >= 0.0 and psi.max() <= 1.0


def test_corrector_expressions_agree(limit, grid):
    corr = build_correctors(limit, 0.1, grid)
    assert len(corr) == len(limit.states)
    for c in corr:
        assert c.consistency(grid) <= 1e-12


def test_corrector_consistency_detects_drift(limit, grid):
    c = build_correctors(limit, 0.1, grid)[-1]
    assert c.consistency(grid) >= 0.0
    drifted = replace(c, E0_cor=c.E0_cor + 1e-6)
    assert drifted.consistency(grid) >= 1e-6 / max(1.0, np.abs(c.E_star).max()) * 0.99
    shifted = replace(c, E_cor=c.E_cor - 1e-6)
    assert shifted.consistency(grid) > 1e-7 / max(1.0, np.abs(c.E_star).max())


def test_corrector_grid_mismatch(limit):
    with pytest.raises(GridError):
        build_correctors(limit, 0.1, Grid3D(Grid2D.square(8), 6))


def test_corrected_lift_has_zero_error(limit, grid):
    eps = 0.1
    corr = build_correctors(limit, eps, grid)
    fields = [corrected_lift(s, c, eps) for s, c in zip(limit.states, corr)]
    norms = corrected_error_norms(fields, limit, corr, eps)
    assert set(norms.values) == set(NORM_KEYS)
    assert max(norms.values.values()) <= 1e-12
    assert corr[-1].xi is not None and corr[-1].kappa is not None


def test_stress_report_keys(limit, grid):
    eps = 0.1
    corr = build_correctors(limit, eps, grid)
    fields = [corrected_lift(s, c, eps) for s, c in zip(limit.states, corr)]
    report = stress_error_norms(fields, limit, corr, eps)
    assert set(report.values) == set(STRESS_KEYS)
    assert all(math.isfinite(v) for v in report.values.values())
    assert len(report.series["sigma13"]) == len(limit.states)


def test_time_mismatch_rejected(limit, grid):
    corr = build_correctors(limit, 0.1, grid)
    fields = [corrected_lift(s, c, 0.1) for s, c in zip(limit.states, corr)]
    with pytest.raises(LabError):
        corrected_error_norms(fields[:-1], limit, corr, 0.1)


def test_closed_form_resultants_match_quadrature(params):
    grid = Grid3D(Grid2D.square(16), 4)
    discrepancy = kl_resultant_check(grid, params)
    assert set(discrepancy) == {"N1", "N2", "N12", "M1", "M2", "M12"}
    assert max(discrepancy.values()) <= 1e-12


def test_flexural_rigidity_matches_bending_coefficient(params):
    assert flexural_rigidity(1.0, 2.0, params.nu) == pytest.approx(params.bending)


def test_equilibrium_residuals_of_zero_field():
    g = Grid2D.square(8)
    residuals = equilibrium_residuals(ResultantField.zeros(g), LoadSpec())
    assert set(residuals) == {"inplane1", "inplane2", "moment1", "moment2", "shear", "moment_equilibrium"}
    assert all(v == 0.0 for v in residuals.values())


def test_limit_resultants_carry_loads(params, limit):
    res = limit_resultants(limit.states[-1], params, limit.loads)
    assert res.M1.shape == limit.operators.grid.base.shape
    assert np.abs(res.f1).max() > 0.0
    assert res.rigidity == pytest.approx(params.bending)


def test_estimate_rate():
    assert estimate_rate([1.0, 0.25], [0.4, 0.2]) == [pytest.approx(2.0)]
    assert estimate_rate([1.0, 0.0, 0.1], [0.4, 0.2, 0.1])[0] is None
    with pytest.raises(LabError):
        estimate_rate([1.0], [0.4])
    with pytest.raises(LabError):
        estimate_rate([1.0, 0.5], [0.2, 0.4])


def test_verdict_line():
    assert Verdict("x.y", True, 1.0, 2.0).line() == "x.y PASS 1.000000e+00 2.000000e+00"
    assert not at_most("a", float("nan"), 1.0).passed
    assert at_least("b", 3.0, 3.0).passed
    assert monotone_decrease([3.0, 2.0, 2.0])
    assert not monotone_decrease([1.0, 2.0])


def test_sweep_verdicts_pass_on_linear_decay():
    epsilons = [0.4, 0.2, 0.1, 0.05]
    norms = [NormReport(e, {k: e for k in NORM_KEYS}) for e in epsilons]
    stresses = [StressReport(e, {k: 2.0 * e for k in STRESS_KEYS}) for e in epsilons]
    apriori = [{"shear": 1.0, "compression": 2.0, "vertical_gradient": 1.5, "horizontal_gradient": 0.5, "taber": e}
               for e in epsilons]
    verdicts = sweep_verdicts(norms, stresses, apriori)
    assert verdicts
    assert all(v.passed for v in verdicts)


def test_sweep_verdicts_flag_growth():
    epsilons = [0.4, 0.2]
    norms = [NormReport(e, {k: 1.0 / e for k in NORM_KEYS}) for e in epsilons]
    stresses = [StressReport(e, {k: e for k in STRESS_KEYS}) for e in epsilons]
    verdicts = sweep_verdicts(norms, stresses, [])
    failed = {v.criterion for v in verdicts if not v.passed}
    assert "eps-convergence.norm.e11" in failed
    assert "eps-convergence.stress.sigma11" not in failed


def test_taber_quantities_judged_separately():
    epsilons = [0.4, 0.2, 0.1]
    norms = [NormReport(e, {k: e for k in NORM_KEYS}) for e in epsilons]
    stresses = [StressReport(e, {k: e for k in STRESS_KEYS}) for e in epsilons]
    apriori = [{"shear": 1.0, "compression": 1.0, "vertical_gradient": 1.0,
                "horizontal_gradient": g, "taber": v}
               for g, v in zip([0.01, 0.02, 0.04], [1.0, 0.5, 0.25])]
    verdicts = {v.criterion: v for v in sweep_verdicts(norms, stresses, apriori)}
    assert not verdicts["taber.horizontal"].passed
    assert verdicts["taber.horizontal"].value == 0.04
    assert verdicts["taber.vertical"].passed


def test_taber_vertical_needs_limit_pressure():
    apriori = [{"shear": 1.0, "compression": 1.0, "vertical_gradient": 1.0, "horizontal_gradient": 1.0}] * 2
    norms = [NormReport(e, {k: e for k in NORM_KEYS}) for e in (0.4, 0.2)]
    stresses = [StressReport(e, {k: e for k in STRESS_KEYS}) for e in (0.4, 0.2)]
    criteria = {v.criterion for v in sweep_verdicts(norms, stresses, apriori)}
    assert "taber.horizontal" in criteria
    assert "taber.vertical" not in criteria
