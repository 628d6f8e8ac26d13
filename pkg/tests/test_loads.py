"""
载荷场景
"""
import numpy as np
import pytest

from src.core.domain.loads import SCENARIOS, build_scenario, default_ramp, mirrored
from src.core.errors import ConfigError


def test_ramp_values():
    ramp = default_ramp(1.0)
    assert ramp(0.0) == 0.0
    assert ramp(0.125) == pytest.approx(0.5)
    assert ramp(0.25) == 1.0
    assert ramp(0.9) == 1.0


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenarios_build(name):
    loads = build_scenario(name)
    y = np.linspace(0.0, 1.0, 5)
    assert loads.traction(2, y, y, 1, 0.5).shape == y.shape
    assert loads.flux_top_bottom(y, y, 0.5).shape == y.shape


def test_unknown_scenario():
    with pytest.raises(ConfigError) as info:
        build_scenario("twist")
    assert info.value.key == "scenario.name"


def test_bend_loads_top_face_only():
    loads = build_scenario("bend")
    y1, y2 = np.array([0.5]), np.array([0.5])
    assert loads.traction(2, y1, y2, 1, 1.0)[0] == pytest.approx(1.0)
    assert loads.traction(2, y1, y2, -1, 1.0)[0] == 0.0
    assert np.all(loads.tangential_moment(y1, y2, 1.0)[0] == 0.0)


def test_stretch_is_face_symmetric():
    loads = build_scenario("stretch")
    y1, y2 = np.linspace(0.1, 0.9, 7), np.linspace(0.2, 0.8, 7)
    for j in (0, 1):
        assert np.array_equal(loads.traction(j, y1, y2, 1, 0.7), loads.traction(j, y1, y2, -1, 0.7))


def test_amplitudes_override():
    loads = build_scenario("bend", amplitudes={"P3": 3.0})
    assert loads.normal_sum(np.array([0.5]), np.array([0.5]), 1.0)[0] == pytest.approx(3.0)


def test_mirrored_swaps_faces():
    loads = build_scenario("mixed")
    m = mirrored(loads)
    y1, y2 = np.linspace(0.1, 0.9, 5), np.linspace(0.3, 0.7, 5)
    t = 0.8
    assert np.allclose(m.traction(0, y1, y2, 1, t), loads.traction(0, y1, y2, -1, t))
    assert np.allclose(m.traction(2, y1, y2, -1, t), -loads.traction(2, y1, y2, 1, t))
    assert np.allclose(m.flux_top_bottom(y1, y2, t), -loads.flux_top_bottom(y1, y2, t))
    assert np.allclose(m.flux_lateral(y1, y2, t), loads.flux_lateral(y1, y2, t))
