"""
Shared fixtures for carreau-stokes tests
"""

import logging

import pytest

from ..fe_space import build_spaces
from ..manufactured import make_case
from ..mesh import unit_square_mesh
from ..solver import SolverConfig


@pytest.fixture(autouse=True)
def reset_package_logger():
    """CliRunner swaps stderr; drop handlers bound to closed streams"""
    yield
    logger = logging.getLogger("carreau_stokes")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def mesh2():
    return unit_square_mesh(2)


@pytest.fixture
def mesh4():
    return unit_square_mesh(4)


@pytest.fixture
def spaces2(mesh2):
    return build_spaces(mesh2, 2)


@pytest.fixture
def spaces4(mesh4):
    return build_spaces(mesh4, 2)


@pytest.fixture
def linear_case():
    """Newtonian case whose exact solution lies in the P2/P1/P2 spaces"""
    return make_case("stokes_linear", p=2.0)


@pytest.fixture
def swirl_case():
    return make_case("test1", p=1.6)


@pytest.fixture
def fast_config():
    return SolverConfig(tol=1e-8, max_iter=60)
