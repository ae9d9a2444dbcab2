import numpy as np
import pytest

from lcklab import manifolds as M


@pytest.fixture(scope="session")
def hopf():
    return M.gallery("hopf_diag", n=2, beta=0.5)


@pytest.fixture(scope="session")
def hopf_pts(hopf):
    return hopf.sample(200, seed=42)


@pytest.fixture(scope="session")
def inoue():
    return M.gallery("inoue_splus")


@pytest.fixture(scope="session")
def inoue_pts(inoue):
    return inoue.sample(200, seed=42)


@pytest.fixture(scope="session")
def nondiag():
    return M.gallery("hopf_nondiag")


@pytest.fixture(scope="session")
def nondiag_pts(nondiag):
    return nondiag.sample(200, seed=42)


@pytest.fixture(scope="session")
def leeolo():
    return M.gallery("leeolo", eps=0.3)


@pytest.fixture(scope="session")
def leeolo_pts(leeolo):
    return leeolo.sample(200, seed=42)


@pytest.fixture(scope="session")
def box_pts():
    rng = np.random.default_rng(7)
    return rng.uniform(-1.0, 1.0, size=(25, 4))
