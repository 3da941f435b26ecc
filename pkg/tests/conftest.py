import warnings

import pytest

from spinsim import lattice, meanfield


@pytest.fixture(scope="session")
def fcc111():
    return lattice.LatticeSpec("fcc", field_dir=(1, 1, 1), r_max=12)


@pytest.fixture(scope="session")
def fcc_sums(fcc111):
    return lattice.compute_lattice_sums(fcc111)


@pytest.fixture(scope="session")
def zb111():
    return lattice.LatticeSpec("zincblende", field_dir=(1, 1, 1), r_max=12)


@pytest.fixture(scope="session")
def zb_report(zb111):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lattice.ConvergenceWarning)
        return meanfield.analyse(zb111, 4.5, 0.5, pumping="optical", grid_density=24)
