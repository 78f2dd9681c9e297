import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gprphase import fourier, thermo
from gprphase.errors import ParameterError
from gprphase.gpr import GprPrim, Material
from gprphase.solver import Boundary, Grid1D, SolverConfig, compute_dt, step

GAS = thermo.IdealGas(1.005 / 0.718, 0.718)


def grid_from_T(T, lam, p=2.5, u=0.0):
    n = len(T)
    rho = p / (GAS.R * T)
    U = np.column_stack([rho, rho * u, p / (GAS.gamma - 1) + 0.5 * rho * u * u, 0 * rho])
    return Grid1D(0.0, 1.0, U, np.zeros(n, int), (Material(GAS, lam, rho.mean(), 2.0),))


def test_parabolic_dt():
    g = grid_from_T(np.full(16, 2.0), 1e-3)
    d = 1e-3 / (g.U[0, 0] * GAS.cv)
    assert fourier.diffusivity(g) == pytest.approx(d, rel=1e-14)
    assert fourier.parabolic_dt(g) == pytest.approx(0.5 * g.dx**2 / d, rel=1e-14)
    assert fourier.parabolic_dt(grid_from_T(np.full(16, 2.0), 0.0)) == np.inf
    cfg = fourier.reference_config()
    assert cfg.model == "euler_fourier"
    assert compute_dt(g, cfg) <= fourier.parabolic_dt(g)


def test_step_rejects_unstable_dt():
    g = grid_from_T(np.full(16, 2.0), 1.0)
    with pytest.raises(ParameterError):
        fourier.step_euler_fourier(g, 2 * fourier.parabolic_dt(g))
    with pytest.raises(ParameterError):
        fourier.conduct(g, 2 * fourier.parabolic_dt(g))


def test_zero_conductivity_is_euler():
    x = (np.arange(64) + 0.5) / 64
    a = grid_from_T(2.0 + 0.5 * np.sin(2 * np.pi * x), 0.0, u=0.3)
    b = a.copy()
    for _ in range(10):
        dt = compute_dt(a, SolverConfig(model="euler"))
        fourier.step_euler_fourier(a, dt)
        step(b, dt, SolverConfig(model="euler"))
    np.testing.assert_array_equal(a.U, b.U)


def test_conduct_matches_discrete_laplacian():
    n, lam = 32, 1e-2
    x = (np.arange(n) + 0.5) / n
    T = 2.0 + 0.3 * np.cos(np.pi * x)
    g = grid_from_T(T, lam)
    dt = 0.5 * fourier.parabolic_dt(g)
    E0 = g.U[:, 2].copy()
    ql, qr = fourier.conduct(g, dt, fourier.reference_config(left=Boundary("reflective"), right=Boundary("reflective")))
    Tp = np.concatenate([[T[0]], T, [T[-1]]])
    lap = (Tp[2:] - 2 * Tp[1:-1] + Tp[:-2]) / g.dx**2
    np.testing.assert_allclose(g.U[:, 2] - E0, dt * lam * lap, rtol=1e-10, atol=1e-15)
    assert ql == 0 and qr == 0


def test_conduct_wall_fluxes_close_energy_budget():
    n, lam = 32, 1e-3
    g = grid_from_T(np.full(n, 2.0), lam)
    cfg = fourier.reference_config(left=Boundary("heat_flux_wall", 3.0), right=Boundary("heat_flux_wall", 1.0))
    E0 = g.totals()[2]
    dt = fourier.parabolic_dt(g)
    ql, qr = fourier.conduct(g, dt, cfg)
    rho = g.U[0, 0]
    assert ql == pytest.approx(rho * 100 * lam * 1.0, rel=1e-12)
    assert qr == pytest.approx(rho * 100 * lam * 1.0, rel=1e-12)
    assert g.totals()[2] - E0 == pytest.approx(dt * (ql - qr), abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1.0, 3.0), min_size=8, max_size=40), st.floats(1e-4, 1e-1), st.floats(0.1, 1.0))
def test_maximum_principle(Ts, lam, frac):
    T = np.array(Ts)
    g = grid_from_T(T, lam)
    fourier.conduct(g, frac * fourier.parabolic_dt(g), fourier.reference_config())
    Tn = g.fields()["T"]
    assert Tn.min() >= T.min() - 1e-12 and Tn.max() <= T.max() + 1e-12


def test_reference_mode_decays_at_isobaric_rate():
    # acoustics equilibrate the pressure, so a cosine mode decays like
    # exp(-pi^2 lambda t / (rho c_p))
    lam, t = 1e-2, 50.0
    cfg = SolverConfig(left=Boundary("reflective"), right=Boundary("reflective"))
    errs = []
    for n in (64, 128):
        x = (np.arange(n) + 0.5) / n
        g = grid_from_T(2.0 + 0.02 * np.cos(np.pi * x), lam)
        rate = np.pi**2 * lam / (g.U[:, 0].mean() * GAS.cv * GAS.gamma)
        E0 = g.totals()[2]
        a0 = 2 / n * np.sum((g.fields()["T"] - 2.0) * np.cos(np.pi * x))
        fourier.run_reference(g, t, cfg)
        T = g.fields()["T"]
        a = 2 / n * np.sum((T - T.mean()) * np.cos(np.pi * x))
        assert g.totals()[2] == pytest.approx(E0, rel=1e-12)
        errs.append(abs(np.log(a0 / a) / t - rate) / rate)
    assert errs[1] < 0.03
    assert errs[1] < 0.5 * errs[0]
