import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gprphase import phase, thermo
from gprphase.errors import ParameterError

from .conftest import DODECANE
from .oracles import k_coefficients as k_oracle

EOS = thermo.PengRobinson(**DODECANE)


@pytest.mark.parametrize("sigma", [1.0, 0.5, 0.1, 1e-3])
def test_k_coefficients_high_precision(sigma):
    got = phase.k_coefficients(sigma)
    ref = k_oracle(sigma)
    for g, r in zip(got, ref):
        assert abs(g - float(r)) <= 1e-12 * abs(float(r))


def test_k_reference_values():
    k1, k2, k3 = phase.k_coefficients(1.0)
    assert k1 == pytest.approx(2.1254, abs=1e-4)
    assert k2 == pytest.approx(1.0299, abs=1e-4)
    assert k3 == pytest.approx(0.4472, abs=1e-4)
    assert phase.k_coefficients(0.3)[1:] == (k2, k3)
    assert k1 * k2 - k3 * k3 == pytest.approx(1.98885, abs=1e-5)
    with pytest.raises(ParameterError):
        phase.k_coefficients(0.0)


def test_condensation_coefficient_limits():
    phase.CLAMP_COUNT.update(low=0, high=0)
    # equal densities: sigma -> 0 and the lower clamp engages
    assert phase.condensation_coefficient(5.0, 5.0, 226.55) == phase.SIGMA_MIN
    assert phase.condensation_coefficient(5.0 * (1 + 1e-6), 5.0, 226.55) == phase.SIGMA_MIN
    assert phase.CLAMP_COUNT["low"] == 2
    with pytest.raises(ParameterError):
        phase.condensation_coefficient(700.0, 4.0, 226.55)
    with pytest.raises(ParameterError):
        phase.condensation_coefficient(-1.0, 4.0)


def test_condensation_coefficient_dodecane():
    rho_l, rho_v, rho_c = 539.94, 4.3830, 226.55
    nu_l = 1 / rho_l - 1 / (3 * rho_c)
    nu_v = 1 / rho_v - 1 / (3 * rho_c)
    x = (nu_l / nu_v) ** (1 / 3)
    expect = (1 - x) * math.exp(-0.5 * x / (1 - x))
    s = phase.condensation_coefficient(rho_l, rho_v, rho_c)
    assert s == pytest.approx(expect, rel=1e-14)
    assert 0.8 < s < 0.85


def test_condensation_coefficient_range_scan():
    # with the orientation used, the raw value never leaves (0, 1): the upper clamp is a guard only
    phase.CLAMP_COUNT.update(low=0, high=0)
    for r in np.geomspace(1e-6, 0.999, 400):
        s = phase.condensation_coefficient(1.0 / r, 1.0)
        assert phase.SIGMA_MIN <= s <= 1.0
    assert phase.CLAMP_COUNT["high"] == 0


def test_onsager_reciprocity_and_scaling():
    k = phase.k_coefficients(0.8)
    L = phase.onsager_coefficients(4.0, 480.0, EOS.R, 1e5, k)
    L2 = phase.onsager_coefficients(8.0, 480.0, EOS.R, 1e5, k)
    assert L2[0] == pytest.approx(2 * L[0], rel=1e-15)
    c = phase.build_closure(500.0, 4.0, 480.0, EOS, 0.8)
    np.testing.assert_array_equal(c.matrix, c.matrix.T)
    assert c.L_em == c.L_me
    assert np.all(np.linalg.eigvalsh(c.matrix) > 0)


def test_onsager_units_and_values():
    k1, k2, k3 = phase.k_coefficients(1.0)
    det = k1 * k2 - k3 * k3
    R, T, rv, ps = EOS.R, 480.0, 4.0, 2e5
    L_mm, L_me, L_ee = phase.onsager_coefficients(rv, T, R, ps, (k1, k2, k3))
    assert L_mm == pytest.approx(k2 / det * rv * math.sqrt(2 * T / R), rel=1e-14)
    assert L_me == pytest.approx(k3 / det * rv * T * math.sqrt(2 * R * T), rel=1e-14)
    assert L_ee == pytest.approx(k1 / det * ps * T * math.sqrt(2 * R * T), rel=1e-14)


@pytest.mark.parametrize("frac", np.linspace(0.6, 0.9, 5))
def test_zero_force_fixed_point(frac):
    T = frac * EOS.T_c
    ps, rl, rv = thermo.saturation_state(T, EOS)
    f = phase.phase_transition_fluxes(rl, T, ps, rv, T, ps, EOS)
    assert f.F_e == 0.0
    assert abs(f.mdot) < 1e-10
    assert abs(f.q_v) < 1e-10 * ps
    assert abs(f.chi) < 1e-10


def test_superheated_liquid_evaporates():
    # initial shock-tube pair: liquid at 0.13 MPa is hotter than saturation at 0.1 MPa
    rl, pl, rv, pv = 539.94, 0.13e6, 4.3830, 0.10e6
    Tl = float(thermo.temperature_rho_p(rl, pl, EOS))
    Tv = float(thermo.temperature_rho_p(rv, pv, EOS))
    f = phase.phase_transition_fluxes(rl, Tl, pl, rv, Tv, pv, EOS)
    assert f.mdot > 0
    assert f.chi > 0
    Fv = np.array([f.F_m, f.F_e])
    assert f.chi == pytest.approx(Fv @ f.closure.matrix @ Fv, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    T=st.floats(0.6, 0.9),
    dT_l=st.floats(-0.02, 0.02),
    dT_v=st.floats(-0.02, 0.02),
    dp=st.floats(-0.2, 0.2),
)
def test_second_law_near_saturation(T, dT_l, dT_v, dp):
    T = T * EOS.T_c
    ps, rl, rv = thermo.saturation_state(T, EOS)
    Tl, Tv, pv = T * (1 + dT_l), T * (1 + dT_v), ps * (1 + dp)
    rho_v = thermo.pr_density_roots(EOS.packed, Tv, pv)[1]
    pl = float(thermo.pressure_rho_T(rl, Tl, EOS))
    f = phase.phase_transition_fluxes(rl, Tl, pl, rho_v, Tv, pv, EOS)
    assert np.all(np.linalg.eigvalsh(f.closure.matrix) > 0)
    assert f.chi >= -1e-12 * (abs(f.mdot * f.F_m) + abs(f.q_v * f.F_e))
