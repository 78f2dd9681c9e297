import numpy as np
import pytest

from gprphase import thermo
from gprphase.gpr import Material

DODECANE = dict(rho_c=226.55, p_c=1.817e6, T_c=658.1, M=0.1703, omega=0.576, cv=2400.0)
LIQ = (539.94, 0.0, 0.13e6, 0.0)
VAP = (4.3830, 0.0, 0.10e6, 0.0)
HEAT_GAS = dict(gamma=1.005 / 0.718, cv=0.718)


@pytest.fixture(scope="session")
def dodecane():
    return thermo.PengRobinson(**DODECANE)


@pytest.fixture(scope="session")
def dodecane_materials(dodecane):
    mats = []
    for lam, (rho, _, p, _) in ((0.085, LIQ), (0.026, VAP)):
        T = float(thermo.temperature_rho_p(rho, p, dodecane))
        mats.append(Material(dodecane, lam, rho, T))
    return tuple(mats)


@pytest.fixture(scope="session")
def heat_gas():
    return thermo.IdealGas(**HEAT_GAS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, name, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n:2d}. {name}: {detail}")
