import numpy as np
import pytest

from gprphase import ghost, thermo
from gprphase.errors import SimulationError, StepSizeError
from gprphase.ghost import LIQUID, VAPOR, InterfaceTrack
from gprphase.gpr import GprPrim, Material
from gprphase.solver import Grid1D

from .conftest import LIQ, VAP


def two_phase(mats, n=20, x=0.5, side="left", ql=GprPrim(*LIQ), qv=GprPrim(*VAP)):
    tr = InterfaceTrack(x, side)
    states = [ql, qv] if side == "left" else [qv, ql]
    return Grid1D.piecewise(0.0, 1.0, n, mats, states, x, (tr.left_phase, tr.right_phase)), tr


def test_track_phases():
    a, b = InterfaceTrack(0.3), InterfaceTrack(0.3, "right")
    assert (a.left_phase, a.right_phase, a.mirrored) == (LIQUID, VAPOR, False)
    assert (b.left_phase, b.right_phase, b.mirrored) == (VAPOR, LIQUID, True)
    with pytest.raises(ValueError):
        InterfaceTrack(0.3, "up")


def test_phase_field_and_interface_cell(dodecane_materials):
    g, tr = two_phase(dodecane_materials, n=10, x=0.43)
    np.testing.assert_array_equal(ghost.phase_field(g.x, tr), [0, 0, 0, 0, 1, 1, 1, 1, 1, 1])
    np.testing.assert_array_equal(g.phase, ghost.phase_field(g.x, tr))
    assert ghost.interface_cell(g, tr) == 3


@pytest.mark.parametrize("x", [0.01, 0.97, -0.2, 1.5])
def test_interface_leaving_domain(dodecane_materials, x):
    g, _ = two_phase(dodecane_materials, n=10)
    with pytest.raises(SimulationError):
        ghost.interface_cell(g, InterfaceTrack(x))


def test_gather_liquid_left(dodecane_materials):
    ql, qv = GprPrim(539.94, 1.5, 0.13e6, 2e-9), GprPrim(4.383, -2.0, 0.1e6, -1e-6)
    g, tr = two_phase(dodecane_materials, ql=ql, qv=qv)
    i, a, b = ghost.gather_interface_states(g, tr)
    assert i == 9
    np.testing.assert_allclose([a.rho, a.u, a.p, a.j], [ql.rho, ql.u, ql.p, ql.j], rtol=1e-12)
    np.testing.assert_allclose([b.rho, b.u, b.p, b.j], [qv.rho, qv.u, qv.p, qv.j], rtol=1e-12)


def test_gather_mirrored(dodecane_materials):
    ql, qv = GprPrim(539.94, 1.5, 0.13e6, 2e-9), GprPrim(4.383, -2.0, 0.1e6, -1e-6)
    g, tr = two_phase(dodecane_materials, side="right", ql=ql, qv=qv)
    _, a, b = ghost.gather_interface_states(g, tr)
    # liquid-left frame: velocities and impulses flip sign
    np.testing.assert_allclose([a.rho, a.u, a.p, a.j], [ql.rho, -ql.u, ql.p, -ql.j], rtol=1e-12)
    np.testing.assert_allclose([b.rho, b.u, b.p, b.j], [qv.rho, -qv.u, qv.p, -qv.j], rtol=1e-12)


def test_mirror_helpers_are_involutions():
    p = GprPrim(2.0, -3.0, 5.0, 7.0)
    assert ghost.mirror_prim(ghost.mirror_prim(p)) == p
    assert ghost.mirror_prim(p) == GprPrim(2.0, 3.0, 5.0, -7.0)


@pytest.fixture(scope="module")
def saturated(dodecane):
    T = 0.75 * dodecane.T_c
    ps, rl, rv = thermo.saturation_state(T, dodecane)
    mats = (Material(dodecane, 0.085, rl, T), Material(dodecane, 0.026, rv, T))
    return mats, GprPrim(rl, 0.0, ps, 0.0), GprPrim(rv, 0.0, ps, 0.0)


@pytest.mark.parametrize("side", ["left", "right"])
def test_ghost_equals_real_without_driving_force(saturated, side):
    mats, ql, qv = saturated
    g, tr = two_phase(mats, side=side, ql=ql, qv=qv)
    i, sol = ghost.solve_at_interface(g, tr)
    gA, gB = ghost.ghost_states(sol, tr)
    f = g.fields()
    real = [GprPrim(f['rho'][k], f['u'][k], f['p'][k], f['j'][k]) for k in (i, i + 1)]
    for gh, r in zip((gA, gB), real):
        np.testing.assert_allclose(gh[[0, 2]], [r.rho, r.p], rtol=1e-8)
        assert abs(gh[1]) < 1e-8 and abs(gh[3]) < 1e-12
    assert abs(ghost.interface_speed(sol, tr)) < 1e-8


def test_advect_and_cfl_guard():
    tr = InterfaceTrack(0.5)
    assert ghost.advect_interface(tr, 2.0, 0.01, 0.1, t=0.0) == 0.5
    assert tr.x == pytest.approx(0.52)
    assert tr.history == [(0.0, tr.x, 2.0)]
    ghost.advect_interface(tr, -5.0, 0.01, 0.1)  # exactly at the limit
    assert tr.x == pytest.approx(0.47)
    with pytest.raises(StepSizeError):
        ghost.advect_interface(tr, 5.1, 0.01, 0.1)
    assert tr.x == pytest.approx(0.47)


@pytest.fixture
def shock_solution(dodecane_materials):
    g, tr = two_phase(dodecane_materials)
    _, sol = ghost.solve_at_interface(g, tr)
    return g, tr, sol


def test_fill_without_crossing(shock_solution):
    g, tr, sol = shock_solution
    U0, ph0 = g.U.copy(), g.phase.copy()
    x_old = ghost.advect_interface(tr, 0.01 * g.dx / 1.0, 1.0, g.dx)
    defect, crossed = ghost.fill_phase_change_cells(g, x_old, tr, sol)
    assert len(crossed) == 0 and np.all(defect == 0)
    np.testing.assert_array_equal(g.U, U0)
    np.testing.assert_array_equal(g.phase, ph0)


@pytest.mark.parametrize("ds", [-0.3, 0.3])
def test_fill_single_crossing(shock_solution, ds):
    g, tr, sol = shock_solution
    i = ghost.interface_cell(g, tr)
    # put the interface just beside a centre so a small move crosses it
    tr.x = g.x[i] + 0.05 * g.dx if ds < 0 else g.x[i + 1] - 0.05 * g.dx
    k = i if ds < 0 else i + 1
    U_old = g.U[k].copy()
    x_old = ghost.advect_interface(tr, ds * g.dx, 1.0, g.dx)
    defect, crossed = ghost.fill_phase_change_cells(g, x_old, tr, sol)
    np.testing.assert_array_equal(crossed, [k])
    new_phase = VAPOR if ds < 0 else LIQUID
    assert g.phase[k] == new_phase
    np.testing.assert_allclose(g.U[k], ghost.star_cons(sol, tr, new_phase), rtol=1e-15)
    np.testing.assert_allclose(defect, g.dx * (g.U[k] - U_old), rtol=1e-14)
    np.testing.assert_array_equal(g.phase, ghost.phase_field(g.x, tr))


def test_star_cons_mirrored(shock_solution):
    _, tr, sol = shock_solution
    a = ghost.star_cons(sol, tr, LIQUID)
    b = ghost.star_cons(sol, InterfaceTrack(0.5, "right"), LIQUID)
    np.testing.assert_allclose(b, a * np.array([1, -1, 1, -1]))
