import numpy as np
import pytest

from infgen import build_grid, switching_double_gyre
from infgen.velocity import VelocityField


@pytest.fixture(scope="session")
def gyre_field():
    return switching_double_gyre()


@pytest.fixture(scope="session")
def gyre_grid_small():
    return build_grid("planar", (0, 3), (0, 2), 20, 14)


@pytest.fixture(scope="session")
def east_block_grid():
    return build_grid("spherical", (15, 60), (30, 75), 45, 45)


def constant_field(u, v, tau=1.0):
    return VelocityField(
        lambda t, p: np.column_stack([np.full(len(p), float(u)),
                                      np.full(len(p), float(v))]), tau)
