"""Approximate two-phase Riemann solvers HLLP_mq and HLLP_m.

The wave pattern is two classical outer waves ``s_l < s_v`` and an
undercompressive interface wave ``s#`` in between. The liquid is on the
left. Jump conditions (``[z] = z_v - z_l``, ``m_x = rho_x (u_x - s_x)``)::

    outer:      m_x = rho*_x (u*_x - s_x)
                m_x u_x + p_x = m_x u*_x + p*_x
                m_x e_x + u_x p_x + q_x = m_x e*_x + u*_x p*_x + q*_x
                m_x j_x + T_x = m_x j*_x + T*_x,      q*_x = alpha_x^2 T*_x j*_x
    interface:  m* = rho*_l (u*_l - s#) = rho*_v (u*_v - s#)
                m* [u*] + [p*] = -dp_sigma
                m* [e*] + [u* p*] + [q*] = -s# dp_sigma

``dp_sigma > 0`` means overpressure on the liquid side. For a given
``m*`` the mechanical part is linear and solved in closed form; the
thermal part is linear in the energies once ``q*_v`` is known and gives a
quadratic for each star temperature. The kinetic closure in
:mod:`gprphase.phase` closes the system for ``(m*, q*_v)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import thermo
from .errors import (
    GprError,
    InterfaceFailure,
    MechanicalFailure,
    NotConvergedError,
    ParameterError,
    ThermoFallbackAtSolution,
)
from .gpr import GprCons, GprPrim, cons_to_prim
from .phase import PhaseFluxes, phase_transition_fluxes

NEWTON_TOL = 1e-10
NEWTON_MAXIT = 50
FD_STEP = 1e-6
MAX_HALVINGS = 8
EPS_MDOT = 1e-12


@dataclass(frozen=True)
class BulkState:
    """Primitive bulk state with the derived quantities the solver needs."""

    rho: float
    u: float
    p: float
    j: float
    T: float
    c: float
    e: float
    q: float
    alpha: float

    @classmethod
    def from_prim(cls, prim, material):
        rho, u, p, j = (float(prim.rho), float(prim.u), float(prim.p), float(prim.j))
        eps = float(thermo.internal_energy(rho, p, material.eos))
        T = float(thermo.temperature(rho, eps, material.eos))
        c = float(thermo.sound_speed_rho_T(rho, T, material.eos))
        a = material.alpha
        e = eps + 0.5 * a * a * j * j + 0.5 * u * u
        return cls(rho, u, p, j, T, c, e, a * a * T * j, a)


@dataclass(frozen=True)
class MechanicalState:
    mdot: float
    s_sharp: float
    s_l: float
    s_v: float
    m_l: float
    m_v: float
    rho_l: float
    rho_v: float
    u_l: float
    u_v: float
    p_l: float
    p_v: float


@dataclass(frozen=True)
class ThermalState:
    e_l: float
    e_v: float
    q_l: float
    q_v: float
    T_l: float
    T_v: float
    j_l: float
    j_v: float
    fallback: bool = False


@dataclass
class InterfaceSolution:
    star_l: GprPrim
    star_v: GprPrim
    cons_l: GprCons
    cons_v: GprCons
    s_sharp: float
    mdot: float
    q_v: float
    q_l: float
    delta_T: float
    chi: float
    dp_sigma: float
    mech: MechanicalState
    thermal: ThermalState
    fluxes: PhaseFluxes
    solver: str
    iterations: int
    residual: float
    fallback_used: bool = False
    history: list = field(default_factory=list)
    # thermal state the closure was evaluated on (the reduced iterate for HLLP_m)
    closure_state: ThermalState | None = None

    @property
    def s_l(self):
        return self.mech.s_l

    @property
    def s_v(self):
        return self.mech.s_v


def wave_speeds(ql, qv):
    """Outer wave speeds ``(u_l - c_l, u_v + c_v)`` from :class:`BulkState` inputs."""
    return ql.u - ql.c, qv.u + qv.c


def solve_mechanical(ql, qv, mdot, dp_sigma=0.0):
    """Closed-form mechanical star state for a prescribed interface mass flux."""
    s_l, s_v = wave_speeds(ql, qv)
    m_l = ql.rho * (ql.u - s_l)
    m_v = qv.rho * (qv.u - s_v)
    eps_l = EPS_MDOT * ql.rho * ql.c
    eps_v = EPS_MDOT * qv.rho * qv.c
    if m_l <= eps_l or m_v >= -eps_v:
        raise MechanicalFailure("degenerate outer wave")
    if not (m_v < mdot < m_l):
        raise MechanicalFailure("interface mass flux exceeds the outer-wave mass flux")
    s = (
        -dp_sigma + ql.p - qv.p + m_l * ql.u - m_v * qv.u + mdot * (s_l - s_v)
    ) / (m_l - m_v)
    if not (s_l < s < s_v):
        raise MechanicalFailure("interface speed outside the outer waves")
    u_l = (m_l * s - mdot * s_l) / (m_l - mdot)
    u_v = (m_v * s - mdot * s_v) / (m_v - mdot)
    p_l = ql.p - m_l * (u_l - ql.u)
    p_v = qv.p - m_v * (u_v - qv.u)
    rho_l = m_l / (u_l - s_l)
    rho_v = m_v / (u_v - s_v)
    if not (rho_l > 0 and rho_v > 0 and np.isfinite(rho_l) and np.isfinite(rho_v)):
        raise MechanicalFailure("non-positive star density")
    return MechanicalState(mdot, s, s_l, s_v, m_l, m_v, rho_l, rho_v, u_l, u_v, p_l, p_v)


def _energy_system(mech, ql, qv, q_v_star, dp_sigma):
    """Star energies and ``q*_l`` from the outer and interface energy jumps."""
    m, s = mech.mdot, mech.s_sharp
    e_v = (mech.m_v * qv.e + qv.u * qv.p + qv.q - mech.u_v * mech.p_v - q_v_star) / mech.m_v
    A_l = mech.m_l * ql.e + ql.u * ql.p + ql.q - mech.u_l * mech.p_l
    B = m * e_v + mech.u_v * mech.p_v + q_v_star - mech.u_l * mech.p_l + s * dp_sigma
    e_l = (A_l - B) / (mech.m_l - m)
    q_l = A_l - mech.m_l * e_l
    return e_l, e_v, q_l


def _eos_temperature(rho, e, u, material):
    T = thermo.eos_T_rho_eps(material.eos.packed, rho, e - 0.5 * u * u)
    if not (T > 0):
        raise MechanicalFailure("star energy below the EOS floor")
    return float(T)


def _star_temperature(m_x, side, q_star, rho_star, e_star, u_star, material):
    """Root of ``T^2 - (m j + T_x) T + m q*/alpha^2 = 0``; EOS fallback if complex."""
    K = m_x * side.j + side.T
    disc = K * K - 4.0 * m_x * q_star / side.alpha**2
    if disc >= 0 and K + math.sqrt(disc) > 0:
        T = 0.5 * (K + math.sqrt(disc))
        return T, q_star / (side.alpha**2 * T), False
    T = _eos_temperature(rho_star, e_star, u_star, material)
    return T, q_star / (side.alpha**2 * T), True


def solve_thermo_mq(mech, q_v_star, ql, qv, mat_l, mat_v, dp_sigma=0.0):
    e_l, e_v, q_l = _energy_system(mech, ql, qv, q_v_star, dp_sigma)
    T_l, j_l, fb_l = _star_temperature(mech.m_l, ql, q_l, mech.rho_l, e_l, mech.u_l, mat_l)
    T_v, j_v, fb_v = _star_temperature(mech.m_v, qv, q_v_star, mech.rho_v, e_v, mech.u_v, mat_v)
    return ThermalState(e_l, e_v, q_l, q_v_star, T_l, T_v, j_l, j_v, fb_l or fb_v)


def solve_thermo_m(mech, ql, qv, mat_l, mat_v):
    """Reduced thermal system: outer energy jumps without heat flux."""
    e_l = (mech.m_l * ql.e + ql.u * ql.p - mech.u_l * mech.p_l) / mech.m_l
    e_v = (mech.m_v * qv.e + qv.u * qv.p - mech.u_v * mech.p_v) / mech.m_v
    T_l = _eos_temperature(mech.rho_l, e_l, mech.u_l, mat_l)
    T_v = _eos_temperature(mech.rho_v, e_v, mech.u_v, mat_v)
    j_l = (mech.m_l * ql.j + ql.T - T_l) / mech.m_l
    j_v = (mech.m_v * qv.j + qv.T - T_v) / mech.m_v
    q_l = ql.alpha**2 * T_l * j_l
    q_v = qv.alpha**2 * T_v * j_v
    return ThermalState(e_l, e_v, q_l, q_v, T_l, T_v, j_l, j_v, False)


def correction_m(mech, thermal, q_v_star, ql, qv, mat_l, mat_v, dp_sigma=0.0):
    """Correction after the ``m*`` iteration.

    Energies and ``q*_l`` follow from the full energy jumps with the closure
    ``q*_v``; temperatures and thermal impulses are then re-solved from the
    outer ``j`` jumps so that ``q*_x = alpha^2 T*_x j*_x`` holds as well.
    """
    e_l, e_v, q_l = _energy_system(mech, ql, qv, q_v_star, dp_sigma)
    T_l, j_l, fb_l = _star_temperature(mech.m_l, ql, q_l, mech.rho_l, e_l, mech.u_l, mat_l)
    T_v, j_v, fb_v = _star_temperature(mech.m_v, qv, q_v_star, mech.rho_v, e_v, mech.u_v, mat_v)
    return ThermalState(e_l, e_v, q_l, q_v_star, T_l, T_v, j_l, j_v, fb_l or fb_v)


def _micro(mech, thermal, eos, sigma_c):
    return phase_transition_fluxes(
        mech.rho_l, thermal.T_l, mech.p_l, mech.rho_v, thermal.T_v, mech.p_v, eos, sigma_c
    )


def _star_prims(mech, thermal, mat_l, mat_v):
    out = []
    for rho, u, e, j, mat in (
        (mech.rho_l, mech.u_l, thermal.e_l, thermal.j_l, mat_l),
        (mech.rho_v, mech.u_v, thermal.e_v, thermal.j_v, mat_v),
    ):
        cons = GprCons(rho, rho * u, rho * e, rho * j)
        out.append((cons_to_prim(cons, mat), cons))
    return out


def jump_residuals(sol, ql, qv, mat_l, mat_v):
    """Scaled residuals of every jump relation at a solution.

    Mass terms are scaled by ``rho c``, momentum by ``rho c^2``, energy by
    ``rho c (c^2 + c_v T)`` and the ``j`` relation by ``T`` of the adjacent
    bulk state.
    """
    ml, th = sol.mech, sol.thermal
    dps = sol.dp_sigma
    r = {}
    for tag, b, mx, sx, rho, u, p, e, q, T, j in (
        ("l", ql, ml.m_l, ml.s_l, ml.rho_l, ml.u_l, ml.p_l, th.e_l, th.q_l, th.T_l, th.j_l),
        ("v", qv, ml.m_v, ml.s_v, ml.rho_v, ml.u_v, ml.p_v, th.e_v, th.q_v, th.T_v, th.j_v),
    ):
        mass = b.rho * b.c
        mom = mass * b.c
        mat = mat_l if tag == "l" else mat_v
        ener = mass * (b.c**2 + mat.cv * b.T)
        r[f"outer_mass_{tag}"] = (b.rho * (b.u - sx) - rho * (u - sx)) / mass
        r[f"outer_momentum_{tag}"] = (mx * b.u + b.p - mx * u - p) / mom
        r[f"outer_energy_{tag}"] = (mx * b.e + b.u * b.p + b.q - mx * e - u * p - q) / ener
        r[f"outer_j_{tag}"] = (mx * b.j + b.T - mx * j - T) / b.T
        r[f"heat_flux_{tag}"] = (q - b.alpha**2 * T * j) / ener
        r[f"interface_mass_{tag}"] = (sol.mdot - rho * (u - sol.s_sharp)) / mass
    mom_v = qv.rho * qv.c**2
    ener_v = qv.rho * qv.c * (qv.c**2 + mat_v.cv * qv.T)
    m = sol.mdot
    r["interface_momentum"] = (m * (ml.u_v - ml.u_l) + ml.p_v - ml.p_l + dps) / mom_v
    r["interface_energy"] = (
        m * (th.e_v - th.e_l) + ml.u_v * ml.p_v - ml.u_l * ml.p_l + th.q_v - th.q_l + sol.s_sharp * dps
    ) / ener_v
    return r


# ---------------------------------------------------------------- drivers


def _prepare(Q_l, Q_v, mat_l, mat_v):
    if not isinstance(mat_l.eos, thermo.PengRobinson) or not isinstance(mat_v.eos, thermo.PengRobinson):
        raise ParameterError("the phase-transition closure requires Peng-Robinson phases")
    if not (mat_l.alpha > 0 and mat_v.alpha > 0):
        raise ParameterError("both phases need a positive heat-conduction speed alpha")
    ql = Q_l if isinstance(Q_l, BulkState) else BulkState.from_prim(Q_l, mat_l)
    qv = Q_v if isinstance(Q_v, BulkState) else BulkState.from_prim(Q_v, mat_v)
    m_scale = qv.rho * qv.c
    q_scale = m_scale * mat_v.cv * qv.T
    return ql, qv, m_scale, q_scale


def _finish(name, mech, thermal, fluxes, ql, qv, mat_l, mat_v, dp_sigma, it, res, hist):
    (pl, cl), (pv, cv) = _star_prims(mech, thermal, mat_l, mat_v)
    delta_T = mech.mdot * (thermal.j_v - thermal.j_l) + thermal.T_v - thermal.T_l
    return InterfaceSolution(
        star_l=pl, star_v=pv, cons_l=cl, cons_v=cv,
        s_sharp=mech.s_sharp, mdot=mech.mdot, q_v=thermal.q_v, q_l=thermal.q_l,
        delta_T=delta_T, chi=fluxes.chi, dp_sigma=dp_sigma,
        mech=mech, thermal=thermal, fluxes=fluxes, solver=name,
        iterations=it, residual=res, fallback_used=thermal.fallback, history=hist,
    )


def solve_hllp_mq(Q_l, Q_v, mat_l, mat_v, dp_sigma=0.0, sigma_c=None, x0=(0.0, 0.0)):
    """HLLP_mq: Newton on ``(m*, q*_v)`` with a finite-difference Jacobian.

    ``Q_l``/``Q_v`` are :class:`GprPrim` (or :class:`BulkState`) with the
    liquid on the left. ``sigma_c`` fixes the condensation coefficient;
    by default it follows the star densities.
    """
    ql, qv, ms, qs = _prepare(Q_l, Q_v, mat_l, mat_v)
    eos = mat_l.eos
    scale = np.array([ms, qs])

    def evaluate(x):
        mech = solve_mechanical(ql, qv, x[0], dp_sigma)
        thermal = solve_thermo_mq(mech, x[1], ql, qv, mat_l, mat_v, dp_sigma)
        fl = _micro(mech, thermal, eos, sigma_c)
        F = (x - np.array([fl.mdot, fl.q_v])) / scale
        return F, mech, thermal, fl

    x = np.array(x0, dtype=float)
    hist = []
    try:
        F, mech, thermal, fl = evaluate(x)
    except GprError as exc:
        raise InterfaceFailure(f"initial guess not admissible: {exc}") from exc
    res = float(np.max(np.abs(F)))
    hist.append(res)
    it = 0
    while res >= NEWTON_TOL:
        if it >= NEWTON_MAXIT:
            raise NotConvergedError("HLLP_mq did not converge", it, res)
        it += 1
        J = np.empty((2, 2))
        for k in range(2):
            h = FD_STEP * max(abs(x[k]), scale[k] * 1e-3)
            xp = x.copy()
            xp[k] += h
            try:
                Fp = evaluate(xp)[0]
            except GprError:
                xp[k] = x[k] - h
                Fp = evaluate(xp)[0]
                h = -h
            J[:, k] = (Fp - F) / h
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NotConvergedError("singular Newton Jacobian", it, res) from exc
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            try:
                F_new, mech_new, th_new, fl_new = evaluate(x + lam * dx)
                break
            except GprError:
                lam *= 0.5
        else:
            raise NotConvergedError("damping exhausted on mechanical failure", it, res)
        x = x + lam * dx
        F, mech, thermal, fl = F_new, mech_new, th_new, fl_new
        res = float(np.max(np.abs(F)))
        hist.append(res)
    if thermal.fallback:
        raise ThermoFallbackAtSolution("EOS temperature fallback used at the converged iterate")
    return _finish("hllp_mq", mech, thermal, fl, ql, qv, mat_l, mat_v, dp_sigma, it, res, hist)


def solve_hllp_m(Q_l, Q_v, mat_l, mat_v, dp_sigma=0.0, sigma_c=None, x0=0.0):
    """HLLP_m: scalar Newton on ``m*`` with the reduced thermal system, then correction."""
    ql, qv, ms, _ = _prepare(Q_l, Q_v, mat_l, mat_v)
    eos = mat_l.eos

    def evaluate(m):
        mech = solve_mechanical(ql, qv, m, dp_sigma)
        thermal = solve_thermo_m(mech, ql, qv, mat_l, mat_v)
        fl = _micro(mech, thermal, eos, sigma_c)
        return (m - fl.mdot) / ms, mech, thermal, fl

    m = float(x0)
    hist = []
    try:
        F, mech, thermal, fl = evaluate(m)
    except GprError as exc:
        raise InterfaceFailure(f"initial guess not admissible: {exc}") from exc
    hist.append(abs(F))
    it = 0
    while abs(F) >= NEWTON_TOL:
        if it >= NEWTON_MAXIT:
            raise NotConvergedError("HLLP_m did not converge", it, abs(F))
        it += 1
        h = FD_STEP * max(abs(m), ms * 1e-3)
        try:
            Fp = evaluate(m + h)[0]
        except GprError:
            h = -h
            Fp = evaluate(m + h)[0]
        d = (Fp - F) / h
        if d == 0:
            raise NotConvergedError("zero derivative in HLLP_m", it, abs(F))
        dm = -F / d
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            try:
                out = evaluate(m + lam * dm)
                break
            except GprError:
                lam *= 0.5
        else:
            raise NotConvergedError("damping exhausted on mechanical failure", it, abs(F))
        m = m + lam * dm
        F, mech, thermal, fl = out
        hist.append(abs(F))
    iterate = thermal
    thermal = correction_m(mech, thermal, fl.q_v, ql, qv, mat_l, mat_v, dp_sigma)
    if thermal.fallback:
        raise ThermoFallbackAtSolution("EOS temperature fallback needed in the correction step")
    sol = _finish("hllp_m", mech, thermal, fl, ql, qv, mat_l, mat_v, dp_sigma, it, abs(F), hist)
    sol.closure_state = iterate
    return sol


SOLVERS = {"hllp_mq": solve_hllp_mq, "hllp_m": solve_hllp_m}


def solve_interface(name, Q_l, Q_v, mat_l, mat_v, dp_sigma=0.0, **kw):
    try:
        fn = SOLVERS[name]
    except KeyError:
        raise ParameterError(f"unknown interface solver {name!r}") from None
    return fn(Q_l, Q_v, mat_l, mat_v, dp_sigma, **kw)


def closure_residual(sol, mat_l, sigma_c=None):
    """Fixed-point defect ``micro(star states) - (m*, q*_v)``."""
    fl = _micro(sol.mech, sol.closure_state or sol.thermal, mat_l.eos, sigma_c)
    return fl.mdot - sol.mdot, fl.q_v - sol.q_v
