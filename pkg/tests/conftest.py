"""
公共夹具
"""
import pytest

from src.core.domain.grid import Grid2D, Grid3D
from src.core.domain.params import DimensionlessParams, lame_ratio


@pytest.fixture
def params() -> DimensionlessParams:
    return DimensionlessParams(eps=0.2, gamma=1.0, lam=lame_ratio(0.25), alpha=0.9, nu=0.25)


@pytest.fixture
def grid() -> Grid3D:
    return Grid3D(Grid2D.square(8), 4)
