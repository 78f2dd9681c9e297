"""Compiled finite-volume kernels.

Layout: ``U`` is ``(N, 4)`` conserved, ``mats`` is ``(n_mat, MPACK)`` and
``phase`` maps each cell to a material row. Primitive work arrays carry two
ghost cells per side, so interior cell ``i`` sits at extended index ``i+2``
and face ``f`` (``0..N``) separates extended cells ``f+1`` and ``f+2``.

An interface is passed as the index ``iface`` of the last cell of the left
phase (``-1`` for none) plus the two ghost primitives ``gA`` (left phase)
and ``gB`` (right phase). The interface face then carries two one-sided
fluxes, ``FA`` leaving cell ``iface`` and ``FB`` entering ``iface+1``.
"""
import math

import numpy as np
from numba import njit

from .gpr import K_ALPHA, K_LAM, cons_to_prim_kernel, speeds_kernel
from .relax import SEMI_ANALYTIC, explicit_kernel, semi_analytic_kernel
from .riemann import hll_kernel, minmod
from .thermo import K_CV, K_GAMMA, K_PINF, K_R, PENG_ROBINSON, K_KIND, eos_eps_rho_p, eos_T_rho_eps

TRANSMISSIVE = 0
REFLECTIVE = 1
HEAT_WALL = 2
INFLOW = 3

# bc_par columns
BP_TB = 0
BP_H = 1
BP_STATE = 2  # rho, u, p, j in columns 2..5
NBP = 6

STATUS_OK = 0
STATUS_BAD_STATE = 1
STATUS_BAD_SPEED = 2
STATUS_MAX_STEPS = 3

TINY = 1e-150

RK_C = np.array([0.5, 0.5, 1.0])
RK_B = np.array([1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0])


@njit(cache=True, error_model="numpy")
def wall_face_T(Tc, TB, q, dx, lam, side):
    """Wall-face temperature for the thermal-impulse flux: linear extrapolation
    with the wall heat flux, kept between the cell and wall temperatures."""
    Tf = Tc + q * dx / (2.0 * lam) if side == 0 else Tc - q * dx / (2.0 * lam)
    lo, hi = min(Tc, TB), max(Tc, TB)
    return min(max(Tf, lo), hi)


@njit(cache=True, error_model="numpy")
def cell_prims(U, mats, phase, heat, W, T):
    """Fill interior rows of ``W`` (rho, u, p, j) and ``T``; False on bad state."""
    N = U.shape[0]
    for i in range(N):
        M = mats[phase[i]]
        rho = U[i, 0]
        if not rho > 0.0:
            return False
        J = U[i, 3] if heat else 0.0
        u, p, j, eps, t = cons_to_prim_kernel(M, rho, U[i, 1], U[i, 2], J)
        if not (t > 0.0 and p == p):
            return False
        W[i + 2, 0] = rho
        W[i + 2, 1] = u
        W[i + 2, 2] = p
        W[i + 2, 3] = j
        T[i + 2] = t
    return True


@njit(cache=True, error_model="numpy")
def _fill_ghosts(W, T, N, bc_kind, bc_par):
    for side in range(2):
        k = bc_kind[side]
        for g in range(2):
            if side == 0:
                e = 1 - g
                src = 2 + g
                near = 2
            else:
                e = N + 2 + g
                src = N + 1 - g
                near = N + 1
            if k == TRANSMISSIVE:
                for c in range(4):
                    W[e, c] = W[near, c]
                T[e] = T[near]
            elif k == INFLOW:
                for c in range(4):
                    W[e, c] = bc_par[side, BP_STATE + c]
                T[e] = T[near]
            else:
                W[e, 0] = W[src, 0]
                W[e, 1] = -W[src, 1]
                W[e, 2] = W[src, 2]
                W[e, 3] = -W[src, 3]
                T[e] = T[src]


@njit(cache=True, error_model="numpy", inline="always")
def _face_state(M, W, S, e, sgn):
    """MUSCL face value of extended cell ``e``; falls back to first order if inadmissible."""
    r = W[e, 0] + sgn * 0.5 * S[e, 0]
    u = W[e, 1] + sgn * 0.5 * S[e, 1]
    p = W[e, 2] + sgn * 0.5 * S[e, 2]
    j = W[e, 3] + sgn * 0.5 * S[e, 3]
    ok = r > 0.0
    if ok:
        eps = eos_eps_rho_p(M, r, p)
        ok = eos_T_rho_eps(M, r, eps) > 0.0
    if not ok:
        return W[e, 0], W[e, 1], W[e, 2], W[e, 3]
    return r, u, p, j


@njit(cache=True, error_model="numpy")
def rhs(U, dx, mats, phase, heat, bc_kind, bc_par, iface, gA, gB, dU, fb, fi, W, S, T):
    """Flux divergence ``dU``; boundary fluxes in ``fb``, interface fluxes in ``fi``."""
    N = U.shape[0]
    if not cell_prims(U, mats, phase, heat, W, T):
        return False
    _fill_ghosts(W, T, N, bc_kind, bc_par)
    iL = iface + 2
    iR = iface + 3
    for e in range(1, N + 3):
        for c in range(4):
            left = W[e - 1, c]
            right = W[e + 1, c]
            if iface >= 0:
                if e == iL:
                    right = gA[c]
                elif e == iR:
                    left = gB[c]
            S[e, c] = minmod(W[e, c] - left, right - W[e, c])
    for i in range(N):
        for c in range(4):
            dU[i, c] = 0.0
    for f in range(N + 1):
        eL = f + 1
        eR = f + 2
        pL = phase[min(max(eL - 2, 0), N - 1)]
        pR = phase[min(max(eR - 2, 0), N - 1)]
        ML = mats[pL]
        MR = mats[pR]
        rl, ul, pl, jl = _face_state(ML, W, S, eL, 1.0)
        rr, ur, pr, jr = _face_state(MR, W, S, eR, -1.0)
        if iface >= 0 and f == iface + 1:
            a0, a1, a2, a3, ok1 = hll_kernel(ML, ML, heat, rl, ul, pl, jl, gA[0], gA[1], gA[2], gA[3])
            b0, b1, b2, b3, ok2 = hll_kernel(MR, MR, heat, gB[0], gB[1], gB[2], gB[3], rr, ur, pr, jr)
            if not (ok1 and ok2):
                return False
            fi[0, 0] = a0
            fi[0, 1] = a1
            fi[0, 2] = a2
            fi[0, 3] = a3
            fi[1, 0] = b0
            fi[1, 1] = b1
            fi[1, 2] = b2
            fi[1, 3] = b3
            dU[iface, 0] -= a0 / dx
            dU[iface, 1] -= a1 / dx
            dU[iface, 2] -= a2 / dx
            dU[iface, 3] -= a3 / dx
            dU[iface + 1, 0] += b0 / dx
            dU[iface + 1, 1] += b1 / dx
            dU[iface + 1, 2] += b2 / dx
            dU[iface + 1, 3] += b3 / dx
            continue
        F0, F1, F2, F3, ok = hll_kernel(ML, MR, heat, rl, ul, pl, jl, rr, ur, pr, jr)
        if not ok:
            return False
        if f == 0 or f == N:
            side = 0 if f == 0 else 1
            k = bc_kind[side]
            if k == REFLECTIVE or k == HEAT_WALL:
                F0 = 0.0
            if k == HEAT_WALL:
                ei = 2 if side == 0 else N + 1
                M = mats[phase[0]] if side == 0 else mats[phase[N - 1]]
                TB = bc_par[side, BP_TB]
                h = bc_par[side, BP_H]
                if side == 0:
                    q = W[ei, 0] * h * (TB - T[ei])
                else:
                    q = W[ei, 0] * h * (T[ei] - TB)
                if heat:
                    F2 = q
                    F3 = wall_face_T(T[ei], TB, q, dx, M[K_LAM], side)
                else:
                    F2 = 0.0
                    F3 = 0.0
            fb[side, 0] = F0
            fb[side, 1] = F1
            fb[side, 2] = F2
            fb[side, 3] = F3
        if f >= 1:
            dU[f - 1, 0] -= F0 / dx
            dU[f - 1, 1] -= F1 / dx
            dU[f - 1, 2] -= F2 / dx
            dU[f - 1, 3] -= F3 / dx
        if f <= N - 1:
            dU[f, 0] += F0 / dx
            dU[f, 1] += F1 / dx
            dU[f, 2] += F2 / dx
            dU[f, 3] += F3 / dx
    return True


@njit(cache=True, error_model="numpy")
def relax(Us, U0, h, mats, phase, integ):
    """Stiff relaxation of ``rho j`` over ``h`` starting from ``U0`` (stage-local tau_H)."""
    N = Us.shape[0]
    for i in range(N):
        M = mats[phase[i]]
        a = M[K_ALPHA]
        if a == 0.0:
            continue
        rho = Us[i, 0]
        u = Us[i, 1] / rho
        j = Us[i, 3] / rho
        eps = Us[i, 2] / rho - 0.5 * u * u - 0.5 * a * a * j * j
        T = eos_T_rho_eps(M, rho, eps)
        if not T > 0.0:
            return False
        tau = rho * M[K_LAM] / (T * a * a)
        if integ == SEMI_ANALYTIC:
            Us[i, 3] = semi_analytic_kernel(U0[i, 3], Us[i, 3], h, tau)
        else:
            Us[i, 3] = explicit_kernel(Us[i, 3], h, tau)
    return True


@njit(cache=True, error_model="numpy")
def rk4_step(U, dt, dx, mats, phase, heat, integ, bc_kind, bc_par, iface, gA, gB, acc, fast):
    """Classical RK4 on the fluxes with relaxation applied to every stage value.

    ``acc`` (4x4) receives the RK-weighted boundary fluxes (rows 0, 1) and
    interface fluxes ``FA``, ``FB`` (rows 2, 3). ``fast`` selects the gas
    fast path (single ideal/stiffened material, no interface).
    """
    N = U.shape[0]
    U0 = U.copy()
    Us = U.copy()
    K = np.zeros((N, 4))
    dU = np.empty((N, 4))
    W = np.zeros((N + 4, 4))
    S = np.zeros((N + 4, 4))
    T = np.zeros(N + 4)
    fb = np.zeros((2, 4))
    fi = np.zeros((2, 4))
    M = mats[0]
    wk = np.zeros((NWORK, N + 4)) if fast else np.zeros((1, 1))
    for r in range(4):
        acc[r, :] = 0.0
    for s in range(4):
        if fast:
            ok = rhs_gas(Us, dx, M, heat, bc_kind, bc_par, dU, fb, wk)
        else:
            ok = rhs(Us, dx, mats, phase, heat, bc_kind, bc_par, iface, gA, gB, dU, fb, fi, W, S, T)
        if not ok:
            return False
        w = RK_B[s]
        for i in range(N):
            for c in range(4):
                K[i, c] += w * dU[i, c]
        for c in range(4):
            acc[0, c] += w * fb[0, c]
            acc[1, c] += w * fb[1, c]
            acc[2, c] += w * fi[0, c]
            acc[3, c] += w * fi[1, c]
        if s < 3:
            h = RK_C[s] * dt
            for i in range(N):
                for c in range(4):
                    Us[i, c] = U0[i, c] + h * dU[i, c]
            if heat and not _relax_any(Us, U0, h, mats, phase, integ, fast):
                return False
    for i in range(N):
        for c in range(4):
            U[i, c] = U0[i, c] + dt * K[i, c]
        # wave fronts decay exponentially into quiescent gas; flushing the
        # tails before they turn subnormal keeps the arithmetic fast
        if abs(U[i, 1]) < TINY:
            U[i, 1] = 0.0
        if abs(U[i, 3]) < TINY:
            U[i, 3] = 0.0
    if heat:
        return _relax_any(U, U0, dt, mats, phase, integ, fast)
    return True


@njit(cache=True, error_model="numpy")
def _relax_any(Us, U0, h, mats, phase, integ, fast):
    if fast:
        return relax_gas(Us, U0, h, mats[0], integ)
    return relax(Us, U0, h, mats, phase, integ)


@njit(cache=True, error_model="numpy")
def max_speed(U, mats, phase, heat):
    """``max(|u| + max(c_s, c_h))``; NaN on a non-physical cell."""
    smax = 0.0
    for i in range(U.shape[0]):
        M = mats[phase[i]]
        rho = U[i, 0]
        J = U[i, 3] if heat else 0.0
        u, p, j, eps, T = cons_to_prim_kernel(M, rho, U[i, 1], U[i, 2], J)
        cs, ch = speeds_kernel(M, heat, rho, T)
        s = abs(u) + max(cs, ch)
        if not s > 0.0:
            return np.nan
        smax = max(smax, s)
    return smax


@njit(cache=True, error_model="numpy")
def max_diffusivity(U, mats, phase):
    """``max(lambda / (rho c_v))`` for the explicit parabolic limit."""
    d = 0.0
    for i in range(U.shape[0]):
        M = mats[phase[i]]
        d = max(d, M[K_LAM] / (U[i, 0] * M[K_CV]))
    return d


@njit(cache=True, error_model="numpy")
def diffuse(U, dt, dx, mats, phase, bc_kind, bc_par):
    """Explicit centred Fourier conduction on ``rho E``; returns the wall fluxes."""
    N = U.shape[0]
    T = np.empty(N)
    for i in range(N):
        M = mats[phase[i]]
        rho = U[i, 0]
        u = U[i, 1] / rho
        T[i] = eos_T_rho_eps(M, rho, U[i, 2] / rho - 0.5 * u * u)
    q = np.zeros(N + 1)
    for f in range(1, N):
        lam = 0.5 * (mats[phase[f - 1]][K_LAM] + mats[phase[f]][K_LAM])
        q[f] = -lam * (T[f] - T[f - 1]) / dx
    if bc_kind[0] == HEAT_WALL:
        q[0] = U[0, 0] * bc_par[0, BP_H] * (bc_par[0, BP_TB] - T[0])
    if bc_kind[1] == HEAT_WALL:
        q[N] = U[N - 1, 0] * bc_par[1, BP_H] * (T[N - 1] - bc_par[1, BP_TB])
    for i in range(N):
        U[i, 2] -= dt / dx * (q[i + 1] - q[i])
    return q[0], q[N]


@njit(cache=True, error_model="numpy")
def advance(U, t, t_end, dx, cfl, mats, phase, heat, integ, fourier, bc_kind, bc_par, max_steps, budget, fast):
    """Single-phase time loop up to ``t_end``.

    ``budget`` (2x4) accumulates ``dt``-weighted left/right boundary fluxes
    (including conduction fluxes in Fourier mode) for conservation checks.
    Returns ``(t, steps, status)``.
    """
    steps = 0
    gA = np.zeros(4)
    gB = np.zeros(4)
    acc = np.zeros((4, 4))
    while t < t_end:
        s = max_speed(U, mats, phase, heat)
        if not (s > 0.0 and math.isfinite(s)):
            return t, steps, STATUS_BAD_SPEED
        dt = cfl * dx / s
        if fourier:
            d = max_diffusivity(U, mats, phase)
            if d > 0.0:
                dt = min(dt, 0.5 * dx * dx / d)
        last = t + dt >= t_end
        if last:
            dt = t_end - t
        if not rk4_step(U, dt, dx, mats, phase, heat, integ, bc_kind, bc_par, -1, gA, gB, acc, fast):
            return t, steps, STATUS_BAD_STATE
        for c in range(4):
            budget[0, c] += dt * acc[0, c]
            budget[1, c] += dt * acc[1, c]
        if fourier:
            qL, qR = diffuse(U, dt, dx, mats, phase, bc_kind, bc_par)
            budget[0, 2] += dt * qL
            budget[1, 2] += dt * qR
        steps += 1
        t = t_end if last else t + dt
        if steps >= max_steps and t < t_end:
            return t, steps, STATUS_MAX_STEPS
    return t, steps, STATUS_OK


# ------------------------------------------------------------ gas fast path
#
# Single-material ideal/stiffened-gas runs without an interface dominate the
# heat-conduction cost (millions of steps). The loops below are branch-free
# over cells and faces so LLVM can vectorize them; they reproduce ``rhs``.

NWORK = 23


@njit(cache=True, error_model="numpy")
def rhs_gas(U, dx, M, heat, bc_kind, bc_par, dU, fb, wk):
    N = U.shape[0]
    g = M[K_GAMMA]
    pinf = M[K_PINF]
    cv = M[K_CV]
    R = M[K_R]
    a = M[K_ALPHA] if heat else 0.0
    a2 = a * a
    hf = 1.0 if heat else 0.0
    icv = 1.0 / cv
    r = wk[0]
    u = wk[1]
    p = wk[2]
    j = wk[3]
    T = wk[4]
    sr = wk[5]
    su = wk[6]
    sp = wk[7]
    sj = wk[8]
    F0 = wk[9]
    F1 = wk[10]
    F2 = wk[11]
    F3 = wk[12]
    ok = 0.0
    for i in range(N):
        rho = U[i, 0]
        ir = 1.0 / rho
        uu = U[i, 1] * ir
        jj = hf * U[i, 3] * ir
        eps = U[i, 2] * ir - 0.5 * uu * uu - 0.5 * a2 * jj * jj
        t = (eps - pinf * ir) * icv
        r[i + 2] = rho
        u[i + 2] = uu
        j[i + 2] = jj
        T[i + 2] = t
        p[i + 2] = (g - 1.0) * rho * eps - g * pinf
        ok += 0.0 if (rho > 0.0 and t > 0.0) else 1.0
    if ok != 0.0:
        return False
    for side in range(2):
        k = bc_kind[side]
        for gg in range(2):
            if side == 0:
                e = 1 - gg
                src = 2 + gg
                near = 2
            else:
                e = N + 2 + gg
                src = N + 1 - gg
                near = N + 1
            if k == TRANSMISSIVE:
                r[e] = r[near]
                u[e] = u[near]
                p[e] = p[near]
                j[e] = j[near]
            elif k == INFLOW:
                r[e] = bc_par[side, BP_STATE]
                u[e] = bc_par[side, BP_STATE + 1]
                p[e] = bc_par[side, BP_STATE + 2]
                j[e] = bc_par[side, BP_STATE + 3]
            else:
                r[e] = r[src]
                u[e] = -u[src]
                p[e] = p[src]
                j[e] = -j[src]
            T[e] = (p[e] + pinf) / (R * r[e])
    for e in range(1, N + 3):
        d1 = r[e] - r[e - 1]
        d2 = r[e + 1] - r[e]
        sr[e] = (d1 if abs(d1) < abs(d2) else d2) if d1 * d2 > 0.0 else 0.0
        d1 = u[e] - u[e - 1]
        d2 = u[e + 1] - u[e]
        su[e] = (d1 if abs(d1) < abs(d2) else d2) if d1 * d2 > 0.0 else 0.0
        d1 = p[e] - p[e - 1]
        d2 = p[e + 1] - p[e]
        sp[e] = (d1 if abs(d1) < abs(d2) else d2) if d1 * d2 > 0.0 else 0.0
        d1 = j[e] - j[e - 1]
        d2 = j[e + 1] - j[e]
        sj[e] = (d1 if abs(d1) < abs(d2) else d2) if d1 * d2 > 0.0 else 0.0
    sq_cv = 1.0 / math.sqrt(cv)
    sq_gR = math.sqrt(g * R)
    iRg = 1.0 / R
    ig1 = 1.0 / (g - 1.0)
    for f in range(N + 1):
        eL = f + 1
        eR = f + 2
        rl = r[eL] + 0.5 * sr[eL]
        ul = u[eL] + 0.5 * su[eL]
        pl = p[eL] + 0.5 * sp[eL]
        jl = j[eL] + 0.5 * sj[eL]
        bad = not (rl > 0.0 and pl + pinf > 0.0)
        rl = r[eL] if bad else rl
        ul = u[eL] if bad else ul
        pl = p[eL] if bad else pl
        jl = j[eL] if bad else jl
        rr = r[eR] - 0.5 * sr[eR]
        ur = u[eR] - 0.5 * su[eR]
        pr = p[eR] - 0.5 * sp[eR]
        jr = j[eR] - 0.5 * sj[eR]
        bad = not (rr > 0.0 and pr + pinf > 0.0)
        rr = r[eR] if bad else rr
        ur = u[eR] if bad else ur
        pr = p[eR] if bad else pr
        jr = j[eR] if bad else jr
        iL = 1.0 / rl
        iR = 1.0 / rr
        TL = (pl + pinf) * iL * iRg
        TR = (pr + pinf) * iR * iRg
        # c_s = sqrt(g R T) and c_h = a/rho sqrt(T/cv) share sqrt(T)
        cL = math.sqrt(TL) * max(sq_gR, a * iL * sq_cv)
        cR = math.sqrt(TR) * max(sq_gR, a * iR * sq_cv)
        EL = (pl + g * pinf) * iL * ig1 + 0.5 * a2 * jl * jl + 0.5 * ul * ul
        ER = (pr + g * pinf) * iR * ig1 + 0.5 * a2 * jr * jr + 0.5 * ur * ur
        sL = min(ul - cL, ur - cR)
        sR = max(ul + cL, ur + cR)
        fl0 = rl * ul
        fl1 = rl * ul * ul + pl
        fl2 = (rl * EL + pl) * ul + a2 * TL * jl
        fl3 = hf * (rl * jl * ul + TL)
        fr0 = rr * ur
        fr1 = rr * ur * ur + pr
        fr2 = (rr * ER + pr) * ur + a2 * TR * jr
        fr3 = hf * (rr * jr * ur + TR)
        w = 1.0 / (sR - sL)
        ss = sL * sR
        h0 = (sR * fl0 - sL * fr0 + ss * (rr - rl)) * w
        h1 = (sR * fl1 - sL * fr1 + ss * (rr * ur - rl * ul)) * w
        h2 = (sR * fl2 - sL * fr2 + ss * (rr * ER - rl * EL)) * w
        h3 = hf * (sR * fl3 - sL * fr3 + ss * (rr * jr - rl * jl)) * w
        lft = sL >= 0.0
        rgt = sR <= 0.0
        F0[f] = fl0 if lft else (fr0 if rgt else h0)
        F1[f] = fl1 if lft else (fr1 if rgt else h1)
        F2[f] = fl2 if lft else (fr2 if rgt else h2)
        F3[f] = fl3 if lft else (fr3 if rgt else h3)
    for side in range(2):
        f = 0 if side == 0 else N
        k = bc_kind[side]
        if k == REFLECTIVE or k == HEAT_WALL:
            F0[f] = 0.0
        if k == HEAT_WALL:
            ei = 2 if side == 0 else N + 1
            TB = bc_par[side, BP_TB]
            h = bc_par[side, BP_H]
            if side == 0:
                q = r[ei] * h * (TB - T[ei])
            else:
                q = r[ei] * h * (T[ei] - TB)
            if heat:
                F2[f] = q
                F3[f] = wall_face_T(T[ei], TB, q, dx, M[K_LAM], side)
            else:
                F2[f] = 0.0
                F3[f] = 0.0
        fb[side, 0] = F0[f]
        fb[side, 1] = F1[f]
        fb[side, 2] = F2[f]
        fb[side, 3] = F3[f]
    idx = 1.0 / dx
    for i in range(N):
        dU[i, 0] = (F0[i] - F0[i + 1]) * idx
        dU[i, 1] = (F1[i] - F1[i + 1]) * idx
        dU[i, 2] = (F2[i] - F2[i + 1]) * idx
        dU[i, 3] = (F3[i] - F3[i + 1]) * idx
    return True


@njit(cache=True, error_model="numpy")
def relax_gas(Us, U0, h, M, integ):
    """``relax`` for a single ideal/stiffened-gas material."""
    N = Us.shape[0]
    a = M[K_ALPHA]
    if a == 0.0:
        return True
    a2 = a * a
    pinf = M[K_PINF]
    cv = M[K_CV]
    lam = M[K_LAM]
    bad = 0.0
    c = a2 / lam if lam > 0.0 else np.inf
    for i in range(N):
        ir = 1.0 / Us[i, 0]
        u = Us[i, 1] * ir
        j = Us[i, 3] * ir
        T = (Us[i, 2] * ir - 0.5 * u * u - 0.5 * a2 * j * j - pinf * ir) / cv
        bad += 0.0 if T > 0.0 else 1.0
        # x = h / tau_H with tau_H = rho lam / (T alpha^2)
        x = h * T * c * ir
        if integ == SEMI_ANALYTIC:
            e = math.exp(-min(x, 700.0))
            # (1 - e^-x)/x, with a series where the difference cancels
            fac = (1.0 - e) / x if x > 1e-4 else 1.0 - 0.5 * x + x * x / 6.0
            Us[i, 3] = U0[i, 3] * e + (Us[i, 3] - U0[i, 3]) * fac
        else:
            Us[i, 3] = explicit_kernel(Us[i, 3], h, Us[i, 0] / (T * c))
    return bad == 0.0
