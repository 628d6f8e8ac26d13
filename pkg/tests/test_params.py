"""
参数与无量纲化
"""
import json
import math
from pathlib import Path

import pytest

from src.core.domain.params import (DimensionlessParams, PhysicalParams, characteristic_scales,
                                    derive_dimensionless, lame_ratio, params_from_config, validate)
from src.core.errors import ParameterError


def test_derive_default_physical():
    d = derive_dimensionless(PhysicalParams())
    assert d.eps == pytest.approx(0.1)
    assert d.lam == pytest.approx(1.0)
    assert d.gamma == pytest.approx(1.0)
    assert d.T_terzaghi == pytest.approx(0.01)


def test_derived_coefficients(params):
    assert params.coupling == pytest.approx(0.6)
    assert params.storage == pytest.approx(1.27)
    assert params.bending == pytest.approx(16.0 / 9.0)
    assert params.compression == pytest.approx(2.0 + params.lam)
    assert params.grad_div == pytest.approx(1.25 / 0.75)


@pytest.mark.parametrize("nu", [0.5, 0.4995, 0.0, -0.1])
def test_nu_outside_band_rejected(nu):
    with pytest.raises(ParameterError) as info:
        derive_dimensionless(PhysicalParams(nu=nu))
    assert info.value.key == "nu"


def test_thick_plate_rejected():
    with pytest.raises(ParameterError) as info:
        derive_dimensionless(PhysicalParams(ell=1.0, L=1.0))
    assert info.value.key == "ell"


@pytest.mark.parametrize("key,value", [("G", 0.0), ("k", -1.0), ("alpha", 1.5), ("gammaG", -0.1)])
def test_invalid_physical_values(key, value):
    with pytest.raises(ParameterError) as info:
        derive_dimensionless(PhysicalParams(**{key: value}))
    assert info.value.key == key


def test_validate_reports_first_violation():
    d = DimensionlessParams(eps=0.7, gamma=-1.0, lam=lame_ratio(0.25), alpha=0.9, nu=0.25)
    with pytest.raises(ParameterError) as info:
        validate(d)
    assert info.value.key == "eps"


def test_validate_lambda_consistency():
    d = DimensionlessParams(eps=0.1, gamma=1.0, lam=2.0, alpha=0.9, nu=0.25)
    with pytest.raises(ParameterError) as info:
        validate(d)
    assert info.value.key == "lambda"


def test_time_scale_ratio_is_inverse_eps_squared():
    p = PhysicalParams(L=1.0, ell=0.2)
    scales = characteristic_scales(p, d_char=2.0)
    eps = derive_dimensionless(p).eps
    assert scales["time_ratio"] == pytest.approx(1.0 / eps ** 2)
    assert scales["P"] == pytest.approx(2.0 * p.G / p.L)


def test_params_from_dimensionless_block():
    d = params_from_config({"dimensionless": {"eps": 0.05, "gamma": 0.5, "nu": 0.3, "alpha": 1.0}})
    assert d.eps == 0.05
    assert d.gamma == 0.5
    assert math.isclose(d.lam, lame_ratio(0.3))


def test_params_from_physical_block():
    d = params_from_config({"physical": {"L": 2.0, "ell": 0.2}})
    assert d.eps == pytest.approx(0.05)


def test_with_eps_keeps_other_fields(params):
    q = params.with_eps(0.05)
    assert q.eps == 0.05
    assert (q.gamma, q.lam, q.alpha, q.nu) == (params.gamma, params.lam, params.alpha, params.nu)


def test_shipped_config_gives_unit_storage():
    data = json.loads((Path(__file__).parent.parent / "config.json").read_text(encoding="utf-8"))
    d = params_from_config(data["params"])
    assert d.gamma == pytest.approx(1.0)
    assert d.eps == pytest.approx(0.1)
    assert d.T_terzaghi == pytest.approx(0.1)
