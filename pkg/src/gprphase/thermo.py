"""Equations of state: ideal gas, stiffened gas and Peng-Robinson.

All quantities are per unit mass. Each EOS packs its constants into a flat
float64 array so the same compiled scalar kernels serve the Python API and
the finite-volume loops in :mod:`gprphase.solver`.

Peng-Robinson caloric closure
-----------------------------
With ``alpha(T) = f(T)**2`` and ``f = 1 + kappa - kappa*sqrt(T/Tc)``::

    p   = R T / (v - b) - a alpha / (v^2 + 2 b v - b^2)
    eps = cv T + a (1 + kappa) f D(v)
    s   = cv ln T + R ln(v - b) - a alpha'(T) D(v)

where ``D(v) = ln((v + (1-sqrt2) b) / (v + (1+sqrt2) b)) / (2 sqrt2 b)``.
Because ``eps`` is quadratic in ``sqrt(T)`` and ``p`` is quadratic in
``sqrt(T)`` at fixed ``v``, both ``T(rho, eps)`` and ``eps(rho, p)`` have
closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .errors import (
    InversionError,
    ParameterError,
    SingularStateError,
    SpinodalError,
    SupercriticalError,
    UnsupportedEosError,
)

R_UNIVERSAL = 8.314462618

IDEAL = 0
STIFFENED = 1
PENG_ROBINSON = 2

# packed layout
K_KIND = 0
K_GAMMA = 1
K_PINF = 2
K_CV = 3
K_R = 4
K_A = 5
K_B = 6
K_KAPPA = 7
K_TC = 8
K_TREF = 9
K_RHOREF = 10
NPACK = 11

SQRT2 = math.sqrt(2.0)


def _require_positive(**kw):
    for name, value in kw.items():
        if not (np.isfinite(value) and value > 0):
            raise ParameterError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class IdealGas:
    gamma: float
    cv: float
    T_ref: float = 1.0
    rho_ref: float = 1.0
    packed: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _require_positive(cv=self.cv, T_ref=self.T_ref, rho_ref=self.rho_ref)
        if not self.gamma > 1.0:
            raise ParameterError("gamma must exceed 1")
        P = np.zeros(NPACK)
        P[K_KIND] = IDEAL
        P[K_GAMMA] = self.gamma
        P[K_CV] = self.cv
        P[K_R] = self.R
        P[K_TREF] = self.T_ref
        P[K_RHOREF] = self.rho_ref
        object.__setattr__(self, "packed", P)

    @property
    def R(self):
        return (self.gamma - 1.0) * self.cv

    @property
    def cp(self):
        return self.gamma * self.cv


@dataclass(frozen=True)
class StiffenedGas:
    gamma: float
    p_inf: float
    cv: float
    T_ref: float = 1.0
    rho_ref: float = 1.0
    packed: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _require_positive(cv=self.cv, T_ref=self.T_ref, rho_ref=self.rho_ref)
        if not self.gamma > 1.0:
            raise ParameterError("gamma must exceed 1")
        if not (np.isfinite(self.p_inf) and self.p_inf >= 0):
            raise ParameterError("p_inf must be non-negative")
        P = np.zeros(NPACK)
        P[K_KIND] = STIFFENED
        P[K_GAMMA] = self.gamma
        P[K_PINF] = self.p_inf
        P[K_CV] = self.cv
        P[K_R] = self.R
        P[K_TREF] = self.T_ref
        P[K_RHOREF] = self.rho_ref
        object.__setattr__(self, "packed", P)

    @property
    def R(self):
        return (self.gamma - 1.0) * self.cv


@dataclass(frozen=True)
class PengRobinson:
    """Peng-Robinson fluid from critical data.

    ``M`` is the molar mass in kg/mol. The entropy reference defaults to the
    critical point so that Gibbs energies of both phases share one datum.
    """

    rho_c: float
    p_c: float
    T_c: float
    M: float
    omega: float
    cv: float
    T_ref: float | None = None
    rho_ref: float | None = None
    packed: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _require_positive(rho_c=self.rho_c, p_c=self.p_c, T_c=self.T_c, M=self.M, cv=self.cv)
        if self.T_ref is None:
            object.__setattr__(self, "T_ref", float(self.T_c))
        if self.rho_ref is None:
            object.__setattr__(self, "rho_ref", float(self.rho_c))
        _require_positive(T_ref=self.T_ref, rho_ref=self.rho_ref)
        if self.rho_ref * self.b >= 1.0:
            raise ParameterError("entropy reference density exceeds 1/b")
        P = np.zeros(NPACK)
        P[K_KIND] = PENG_ROBINSON
        P[K_CV] = self.cv
        P[K_R] = self.R
        P[K_A] = self.a
        P[K_B] = self.b
        P[K_KAPPA] = self.kappa
        P[K_TC] = self.T_c
        P[K_TREF] = self.T_ref
        P[K_RHOREF] = self.rho_ref
        object.__setattr__(self, "packed", P)

    @property
    def R(self):
        return R_UNIVERSAL / self.M

    @property
    def a(self):
        return 0.45724 * self.R**2 * self.T_c**2 / self.p_c

    @property
    def b(self):
        return 0.07780 * self.R * self.T_c / self.p_c

    @property
    def kappa(self):
        w = self.omega
        return 0.37464 + 1.54226 * w - 0.26992 * w * w


EosParameters = IdealGas | StiffenedGas | PengRobinson


# ---------------------------------------------------------------- kernels


@njit(cache=True, error_model="numpy", inline="always")
def _pr_alpha(P, T):
    c1 = P[K_KAPPA] / math.sqrt(P[K_TC])
    s = math.sqrt(T)
    f = 1.0 + P[K_KAPPA] - c1 * s
    return f * f, -c1 * f / s, 0.5 * c1 * c1 / T + 0.5 * c1 * f / (T * s)


@njit(cache=True, error_model="numpy", inline="always")
def _pr_dep(P, v):
    b = P[K_B]
    return math.log((v + (1.0 - SQRT2) * b) / (v + (1.0 + SQRT2) * b)) / (2.0 * SQRT2 * b)


@njit(cache=True, error_model="numpy", inline="always")
def eos_p_rho_T(P, rho, T):
    if P[K_KIND] != PENG_ROBINSON:
        return P[K_R] * rho * T - P[K_PINF]
    v = 1.0 / rho
    b = P[K_B]
    if v <= b or T <= 0.0:
        return np.nan
    al, _, _ = _pr_alpha(P, T)
    return P[K_R] * T / (v - b) - P[K_A] * al / (v * v + 2.0 * b * v - b * b)


@njit(cache=True, error_model="numpy", inline="always")
def eos_eps_rho_T(P, rho, T):
    if P[K_KIND] != PENG_ROBINSON:
        return P[K_CV] * T + P[K_PINF] / rho
    v = 1.0 / rho
    if v <= P[K_B] or T <= 0.0:
        return np.nan
    kap = P[K_KAPPA]
    f = 1.0 + kap - kap * math.sqrt(T / P[K_TC])
    return P[K_CV] * T + P[K_A] * (1.0 + kap) * f * _pr_dep(P, v)


@njit(cache=True, error_model="numpy", inline="always")
def eos_T_rho_eps(P, rho, eps):
    if P[K_KIND] != PENG_ROBINSON:
        T = (eps - P[K_PINF] / rho) / P[K_CV]
        return T if T > 0.0 else np.nan
    v = 1.0 / rho
    if not (v > P[K_B]):
        return np.nan
    kap = P[K_KAPPA]
    D = _pr_dep(P, v)
    k = P[K_A] * (1.0 + kap)
    c1 = kap / math.sqrt(P[K_TC])
    C0 = k * (1.0 + kap) * D
    B = -k * c1 * D
    x = eps - C0
    if not (x > 0.0):
        return np.nan
    s = 2.0 * x / (B + math.sqrt(B * B + 4.0 * P[K_CV] * x))
    return s * s


@njit(cache=True, error_model="numpy", inline="always")
def eos_p_rho_eps(P, rho, eps):
    T = eos_T_rho_eps(P, rho, eps)
    if not (T > 0.0):
        return np.nan
    return eos_p_rho_T(P, rho, T)


@njit(cache=True, error_model="numpy", inline="always")
def eos_T_rho_p(P, rho, p):
    if P[K_KIND] != PENG_ROBINSON:
        T = (p + P[K_PINF]) / (P[K_R] * rho)
        return T if T > 0.0 else np.nan
    v = 1.0 / rho
    b = P[K_B]
    if not (v > b):
        return np.nan
    a = P[K_A]
    kap = P[K_KAPPA]
    c0 = 1.0 + kap
    c1 = kap / math.sqrt(P[K_TC])
    den = v * v + 2.0 * b * v - b * b
    A2 = P[K_R] / (v - b) - a * c1 * c1 / den
    A1 = 2.0 * a * c0 * c1 / den
    A0 = -(a * c0 * c0 / den + p)
    disc = A1 * A1 - 4.0 * A2 * A0
    if disc < 0.0:
        return np.nan
    q = A1 + math.sqrt(disc)
    if q <= 0.0:
        return np.nan
    s = -2.0 * A0 / q
    if not (s > 0.0) or s >= c0 / c1:
        return np.nan
    return s * s


@njit(cache=True, error_model="numpy", inline="always")
def eos_eps_rho_p(P, rho, p):
    if P[K_KIND] != PENG_ROBINSON:
        g = P[K_GAMMA]
        return (p + g * P[K_PINF]) / ((g - 1.0) * rho)
    T = eos_T_rho_p(P, rho, p)
    if not (T > 0.0):
        return np.nan
    return eos_eps_rho_T(P, rho, T)


@njit(cache=True, error_model="numpy", inline="always")
def eos_c2_rho_T(P, rho, T):
    if P[K_KIND] != PENG_ROBINSON:
        return P[K_GAMMA] * P[K_R] * T
    v = 1.0 / rho
    b = P[K_B]
    if v <= b or T <= 0.0:
        return np.nan
    a = P[K_A]
    R = P[K_R]
    al, dal, d2al = _pr_alpha(P, T)
    den = v * v + 2.0 * b * v - b * b
    dpdT = R / (v - b) - a * dal / den
    dpdv = -R * T / ((v - b) * (v - b)) + a * al * (2.0 * v + 2.0 * b) / (den * den)
    cvr = P[K_CV] - T * a * d2al * _pr_dep(P, v)
    return v * v * (-dpdv + T * dpdT * dpdT / cvr)


@njit(cache=True, error_model="numpy")
def eos_cv_rho_T(P, rho, T):
    if P[K_KIND] != PENG_ROBINSON:
        return P[K_CV]
    _, _, d2al = _pr_alpha(P, T)
    return P[K_CV] - T * P[K_A] * d2al * _pr_dep(P, 1.0 / rho)


@njit(cache=True, error_model="numpy")
def eos_cp_rho_T(P, rho, T):
    if P[K_KIND] != PENG_ROBINSON:
        return P[K_GAMMA] * P[K_CV]
    v = 1.0 / rho
    b = P[K_B]
    a = P[K_A]
    R = P[K_R]
    al, dal, _ = _pr_alpha(P, T)
    den = v * v + 2.0 * b * v - b * b
    dpdT = R / (v - b) - a * dal / den
    dpdv = -R * T / ((v - b) * (v - b)) + a * al * (2.0 * v + 2.0 * b) / (den * den)
    return eos_cv_rho_T(P, rho, T) - T * dpdT * dpdT / dpdv


@njit(cache=True, error_model="numpy")
def eos_s_rho_T(P, rho, T):
    if P[K_KIND] != PENG_ROBINSON:
        return P[K_CV] * math.log(T / P[K_TREF]) - P[K_R] * math.log(rho / P[K_RHOREF])
    v = 1.0 / rho
    b = P[K_B]
    if v <= b or T <= 0.0:
        return np.nan
    vr = 1.0 / P[K_RHOREF]
    _, dal, _ = _pr_alpha(P, T)
    _, dalr, _ = _pr_alpha(P, P[K_TREF])
    return (
        P[K_CV] * math.log(T / P[K_TREF])
        + P[K_R] * math.log((v - b) / (vr - b))
        - P[K_A] * (dal * _pr_dep(P, v) - dalr * _pr_dep(P, vr))
    )


@njit(cache=True, error_model="numpy")
def eos_g_rho_T_p(P, rho, T, p):
    """Gibbs energy ``eps + p/rho - T s`` with the supplied pressure."""
    return eos_eps_rho_T(P, rho, T) + p / rho - T * eos_s_rho_T(P, rho, T)


@njit(cache=True, error_model="numpy")
def _cubic_roots(c2, c1, c0):
    """Real roots of ``z^3 + c2 z^2 + c1 z + c0``, ascending, NaN padded."""
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0
    disc = 0.25 * q * q + p * p * p / 27.0
    out = np.full(3, np.nan)
    if disc > 0.0:
        sd = math.sqrt(disc)
        u = -0.5 * q + sd
        w = -0.5 * q - sd
        t = math.copysign(abs(u) ** (1.0 / 3.0), u) + math.copysign(abs(w) ** (1.0 / 3.0), w)
        out[0] = t - c2 / 3.0
        n = 1
    else:
        r = math.sqrt(max(-p / 3.0, 0.0))
        if r == 0.0:
            out[0] = -c2 / 3.0
            n = 1
        else:
            arg = -q / (2.0 * r * r * r)
            arg = min(1.0, max(-1.0, arg))
            phi = math.acos(arg)
            for k in range(3):
                out[k] = 2.0 * r * math.cos((phi - 2.0 * math.pi * k) / 3.0) - c2 / 3.0
            n = 3
    for k in range(n):
        z = out[k]
        for _ in range(2):
            fz = ((z + c2) * z + c1) * z + c0
            dz = (3.0 * z + 2.0 * c2) * z + c1
            if dz != 0.0:
                z -= fz / dz
        out[k] = z
    out[:n] = np.sort(out[:n])
    return out, n


@njit(cache=True, error_model="numpy")
def pr_density_roots(P, T, p):
    """Smallest and largest admissible densities at ``(T, p)``.

    Returns ``(rho_liquid, rho_vapor, nroots)``; when only one admissible
    root exists both densities coincide.
    """
    R = P[K_R]
    b = P[K_B]
    al, _, _ = _pr_alpha(P, T)
    A = P[K_A] * al * p / (R * T) ** 2
    B = b * p / (R * T)
    roots, n = _cubic_roots(-(1.0 - B), A - 3.0 * B * B - 2.0 * B, -(A * B - B * B - B * B * B))
    zmin = np.inf
    zmax = -np.inf
    cnt = 0
    for k in range(n):
        if roots[k] > B:
            cnt += 1
            zmin = min(zmin, roots[k])
            zmax = max(zmax, roots[k])
    if cnt == 0:
        return np.nan, np.nan, 0
    return p / (zmin * R * T), p / (zmax * R * T), cnt


@njit(cache=True, error_model="numpy")
def _sat_residual(P, T, p):
    rl, rv, n = pr_density_roots(P, T, p)
    if n < 2:
        return np.nan, rl, rv
    return eos_g_rho_T_p(P, rl, T, p) - eos_g_rho_T_p(P, rv, T, p), rl, rv


# ---------------------------------------------------------------- Python API


def _packed(eos):
    try:
        return eos.packed
    except AttributeError:
        raise ParameterError(f"not an EOS parameter object: {eos!r}") from None


def _apply(kernel, P, *args):
    if all(np.ndim(a) == 0 for a in args):
        return kernel(P, *(float(a) for a in args))
    arrs = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in args))
    out = np.empty(arrs[0].shape)
    flat = [a.ravel() for a in arrs]
    o = out.reshape(-1)
    for i in range(o.size):
        o[i] = kernel(P, *(f[i] for f in flat))
    return out


def _check_density(eos, rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise SingularStateError("density must be positive")
    if isinstance(eos, PengRobinson) and np.any(rho * eos.b >= 1.0):
        raise SingularStateError("density at or above the co-volume limit 1/b")


def _finite_or(value, exc, msg):
    if not np.all(np.isfinite(value)):
        raise exc(msg)
    return value


def pressure(rho, eps, eos):
    """Pressure from density and specific internal energy."""
    _check_density(eos, rho)
    p = _apply(eos_p_rho_eps, _packed(eos), rho, eps)
    return _finite_or(p, InversionError, "internal energy below the EOS floor")


def temperature(rho, eps, eos):
    _check_density(eos, rho)
    T = _apply(eos_T_rho_eps, _packed(eos), rho, eps)
    return _finite_or(T, InversionError, "internal energy below the EOS floor")


def internal_energy(rho, p, eos):
    """Specific internal energy from density and pressure."""
    _check_density(eos, rho)
    e = _apply(eos_eps_rho_p, _packed(eos), rho, p)
    return _finite_or(e, InversionError, "no admissible temperature for (rho, p)")


def temperature_rho_p(rho, p, eos):
    _check_density(eos, rho)
    T = _apply(eos_T_rho_p, _packed(eos), rho, p)
    return _finite_or(T, InversionError, "no admissible temperature for (rho, p)")


def pressure_rho_T(rho, T, eos):
    _check_density(eos, rho)
    return _apply(eos_p_rho_T, _packed(eos), rho, T)


def internal_energy_rho_T(rho, T, eos):
    _check_density(eos, rho)
    return _apply(eos_eps_rho_T, _packed(eos), rho, T)


def entropy(rho, T, eos):
    _check_density(eos, rho)
    return _apply(eos_s_rho_T, _packed(eos), rho, T)


def heat_capacity_p(rho, T, eos):
    _check_density(eos, rho)
    return _apply(eos_cp_rho_T, _packed(eos), rho, T)


def sound_speed(rho, p, eos):
    """Speed of sound; raises :class:`SpinodalError` inside the spinodal."""
    T = temperature_rho_p(rho, p, eos)
    c2 = _apply(eos_c2_rho_T, _packed(eos), rho, T)
    if np.any(~(np.asarray(c2) > 0)):
        raise SpinodalError("squared sound speed is not positive")
    return np.sqrt(c2)


def sound_speed_rho_T(rho, T, eos):
    _check_density(eos, rho)
    c2 = _apply(eos_c2_rho_T, _packed(eos), rho, T)
    if np.any(~(np.asarray(c2) > 0)):
        raise SpinodalError("squared sound speed is not positive")
    return np.sqrt(c2)


def enthalpy(rho, p, eps):
    return eps + p / rho


def gibbs(rho, T, p, eos):
    """Specific Gibbs energy ``eps(rho,T) + p/rho - T s(rho,T)``."""
    _check_density(eos, rho)
    return _apply(eos_g_rho_T_p, _packed(eos), rho, T, p)


def spinodal_pressures(T, eos):
    """Pressures at the liquid (minimum) and vapor (maximum) spinodal."""
    if not isinstance(eos, PengRobinson):
        raise UnsupportedEosError("spinodals only exist for Peng-Robinson")
    if T >= eos.T_c:
        raise SupercriticalError(f"T={T} is not below Tc={eos.T_c}")
    P = eos.packed
    b = eos.b
    al = float(_pr_alpha(P, float(T))[0])
    # dp/dv = 0  <=>  R T den^2 - 2 a alpha (v + b)(v - b)^2 = 0
    den = np.array([-b * b, 2.0 * b, 1.0])
    lhs = eos.R * T * np.polynomial.polynomial.polymul(den, den)
    rhs = 2.0 * eos.a * al * np.polynomial.polynomial.polymul([b, 1.0], [b * b, -2.0 * b, 1.0])
    poly = np.polynomial.polynomial.polysub(lhs, rhs)
    roots = np.polynomial.polynomial.polyroots(poly)
    v = np.sort(roots[(np.abs(roots.imag) < 1e-7 * np.abs(roots.real)) & (roots.real > b)].real)
    if v.size < 2:
        raise SupercriticalError("isotherm has no van der Waals loop")
    p_lo = float(eos_p_rho_T(P, 1.0 / v[0], float(T)))
    p_hi = float(eos_p_rho_T(P, 1.0 / v[-1], float(T)))
    return p_lo, p_hi


def saturation_state(T, eos):
    """Return ``(p_s, rho_l, rho_v)`` at temperature ``T`` (equal Gibbs energy)."""
    T = float(T)
    if not isinstance(eos, PengRobinson):
        raise UnsupportedEosError("saturation requires a Peng-Robinson fluid")
    if not T > 0:
        raise ParameterError("temperature must be positive")
    if T >= eos.T_c:
        raise SupercriticalError(f"T={T} is not below Tc={eos.T_c}")
    P = eos.packed
    p_min, p_max = spinodal_pressures(T, eos)
    hi = p_max * (1.0 - 1e-12)

    def f(p):
        return _sat_residual(P, T, p)[0]

    fhi = f(hi)
    if p_min > 0:
        # the two liquid-side roots merge at the spinodal; step inside until they separate
        for d in (1e-12, 1e-10, 1e-8, 1e-6, 1e-4):
            lo = p_min + d * (hi - p_min)
            flo = f(lo)
            if np.isfinite(flo):
                break
    else:
        # walk down from the vapor spinodal; the cubic loses the liquid root
        # to cancellation at vanishing pressure, so stop at the first sign change
        lo, flo = hi, fhi
        for _ in range(14):
            lo *= 0.1
            flo = f(lo)
            if not np.isfinite(flo) or flo > 0:
                break
    if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
        raise SupercriticalError(f"no saturation bracket at T={T}")
    ps = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    _, rl, rv = _sat_residual(P, T, ps)
    return ps, float(rl), float(rv)


def saturation_pressure(T, eos):
    return saturation_state(T, eos)[0]
