"""One-dimensional GPR hyperbolic heat conduction model.

Conserved vector ``U = (rho, rho u, rho E, rho j)`` with
``E = eps + alpha^2 j^2 / 2 + u^2 / 2`` and heat flux ``q = alpha^2 T j``.
The physical flux is::

    F = (rho u, rho u^2 + p, (rho E + p) u + alpha^2 T j, rho j u + T)

and the only source is the relaxation ``-rho j / tau_H`` on ``rho j`` with
``tau_H = rho lambda / (T alpha^2)``. The relaxation time ``tau`` fixes
``alpha`` through ``alpha^2 = lambda rho0 / (tau T0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from . import thermo
from .errors import InvalidStateError, ParameterError
from .thermo import (
    K_CV,
    NPACK,
    eos_c2_rho_T,
    eos_cp_rho_T,
    eos_eps_rho_p,
    eos_p_rho_T,
    eos_T_rho_eps,
)

# material row = EOS row followed by these entries
K_LAM = NPACK
K_ALPHA = NPACK + 1
K_RHO0 = NPACK + 2
K_T0 = NPACK + 3
MPACK = NPACK + 4

TAU_MODELS = ("kinetic", "thermomass")


def kinetic_tau(lam, rho, T, cv, c_s, rho0, T0):
    """Kinetic-theory relaxation time ``3 lambda T rho0 / (c_s^2 rho cv rho T0)``."""
    return (3.0 / c_s**2) * (lam / (rho * cv)) * (T / T0) * (rho0 / rho)


def thermomass_tau(lam, rho, T, cv, cp):
    """Thermomass relaxation time ``lambda / (rho cv) / (2 cp T)``."""
    return lam / (rho * cv) / (2.0 * cp * T)


tau_kinetic = kinetic_tau
tau_thermomass = thermomass_tau


def theta(tau, alpha, rho, rho0, T, T0):
    """``theta = tau alpha^2 (rho / rho0) (T0 / T)``; ``theta / alpha^2`` is ``tau_H``."""
    return tau * alpha * alpha * (rho / rho0) * (T0 / T)


def heat_flux_of(alpha, T, j):
    return alpha * alpha * T * j


def c_h(alpha, rho, T, cv):
    """Thermo-acoustic speed ``(alpha / rho) sqrt(T / cv)``."""
    return alpha / rho * np.sqrt(T / cv)


@dataclass(frozen=True)
class Material:
    """EOS plus heat-conduction parameters for one phase.

    ``alpha`` is derived from ``tau`` evaluated once at the reference state
    ``(rho0, T0)`` and kept constant afterwards.
    """

    eos: thermo.EosParameters
    lam: float
    rho0: float
    T0: float
    tau_model: str | float = "kinetic"
    alpha: float = field(default=np.nan)
    tau: float = field(default=np.nan)
    packed: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ParameterError("conductivity must be non-negative")
        if not (self.rho0 > 0 and self.T0 > 0):
            raise ParameterError("reference density and temperature must be positive")
        if np.isnan(self.alpha):
            tau = reference_tau(self.eos, self.lam, self.rho0, self.T0, self.tau_model)
            object.__setattr__(self, "tau", tau)
            object.__setattr__(self, "alpha", derive_alpha(self, tau))
        P = np.zeros(MPACK)
        P[:NPACK] = self.eos.packed
        P[K_LAM] = self.lam
        P[K_ALPHA] = self.alpha
        P[K_RHO0] = self.rho0
        P[K_T0] = self.T0
        object.__setattr__(self, "packed", P)

    @property
    def cv(self):
        return self.eos.cv

    def with_conductivity(self, lam):
        return replace(self, lam=lam, alpha=np.nan, tau=np.nan)


def reference_tau(eos, lam, rho0, T0, tau_model):
    if lam == 0:
        return 0.0
    if isinstance(tau_model, str):
        P = eos.packed
        if tau_model == "kinetic":
            c_s = math.sqrt(eos_c2_rho_T(P, rho0, T0))
            return kinetic_tau(lam, rho0, T0, eos.cv, c_s, rho0, T0)
        if tau_model == "thermomass":
            return thermomass_tau(lam, rho0, T0, eos.cv, eos_cp_rho_T(P, rho0, T0))
        raise ParameterError(f"unknown relaxation model {tau_model!r}")
    tau = float(tau_model)
    if not tau > 0:
        raise ParameterError("fixed relaxation time must be positive")
    return tau


def derive_alpha(material, tau):
    """``alpha = sqrt(lambda rho0 / (tau T0))``; zero when there is no conduction."""
    if material.lam == 0:
        return 0.0
    if not tau > 0:
        raise ParameterError("relaxation time must be positive")
    return math.sqrt(material.lam * material.rho0 / (tau * material.T0))


@dataclass
class GprPrim:
    rho: float | np.ndarray
    u: float | np.ndarray
    p: float | np.ndarray
    j: float | np.ndarray

    def as_array(self):
        return np.array([self.rho, self.u, self.p, self.j], dtype=float)


@dataclass
class GprCons:
    rho: float | np.ndarray
    mom: float | np.ndarray
    rhoE: float | np.ndarray
    rhoj: float | np.ndarray

    def as_array(self):
        return np.array([self.rho, self.mom, self.rhoE, self.rhoj], dtype=float)

    @classmethod
    def from_array(cls, U):
        U = np.asarray(U, dtype=float)
        return cls(U[..., 0], U[..., 1], U[..., 2], U[..., 3])


# ---------------------------------------------------------------- kernels


@njit(cache=True, error_model="numpy", inline="always")
def cons_to_prim_kernel(M, rho, mom, rhoE, rhoj):
    """Return ``(u, p, j, eps, T)``; NaN entries flag a non-physical state."""
    u = mom / rho
    j = rhoj / rho
    a = M[K_ALPHA]
    eps = rhoE / rho - 0.5 * u * u - 0.5 * a * a * j * j
    T = eos_T_rho_eps(M, rho, eps)
    p = eos_p_rho_T(M, rho, T)
    return u, p, j, eps, T


@njit(cache=True, error_model="numpy", inline="always")
def prim_to_cons_kernel(M, rho, u, p, j):
    """Return ``(rho u, rho E, rho j, eps, T)``."""
    eps = eos_eps_rho_p(M, rho, p)
    T = eos_T_rho_eps(M, rho, eps)
    a = M[K_ALPHA]
    E = eps + 0.5 * a * a * j * j + 0.5 * u * u
    return rho * u, rho * E, rho * j, eps, T


@njit(cache=True, error_model="numpy", inline="always")
def flux_kernel(M, heat, rho, u, p, j, T, E):
    """Physical flux. With ``heat == 0`` the Euler flux with a frozen ``rho j``."""
    if heat:
        a2 = M[K_ALPHA] * M[K_ALPHA]
        return rho * u, rho * u * u + p, (rho * E + p) * u + a2 * T * j, rho * j * u + T
    return rho * u, rho * u * u + p, (rho * E + p) * u, 0.0


@njit(cache=True, error_model="numpy", inline="always")
def speeds_kernel(M, heat, rho, T):
    """Return ``(c_s, c_h)``."""
    c2 = eos_c2_rho_T(M, rho, T)
    cs = math.sqrt(c2) if c2 > 0.0 else np.nan
    ch = 0.0
    if heat:
        ch = M[K_ALPHA] / rho * math.sqrt(T / M[K_CV])
    return cs, ch


@njit(cache=True, error_model="numpy")
def relaxation_time_kernel(M, rho, T):
    a = M[K_ALPHA]
    if a == 0.0:
        return 0.0
    return rho * M[K_LAM] / (T * a * a)


# ---------------------------------------------------------------- Python API


def _as_float(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _vectorize(kernel, M, *args):
    if all(np.ndim(a) == 0 for a in args):
        return kernel(M, *(float(a) for a in args))
    arrs = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in args))
    flat = [a.ravel() for a in arrs]
    n = flat[0].size
    rows = [kernel(M, *(f[i] for f in flat)) for i in range(n)]
    return tuple(np.array(col).reshape(arrs[0].shape) for col in zip(*rows))


def cons_to_prim(cons, material):
    """Convert conserved to primitive variables.

    Raises :class:`InvalidStateError` for ``rho <= 0`` or an internal energy
    below the EOS floor.
    """
    rho = _as_float(cons.rho)
    if np.any(~(np.asarray(rho) > 0)):
        raise InvalidStateError("density must be positive")
    u, p, j, _, T = _vectorize(cons_to_prim_kernel, material.packed, rho, cons.mom, cons.rhoE, cons.rhoj)
    if not np.all(np.isfinite(T)) or np.any(np.asarray(T) <= 0):
        raise InvalidStateError("internal energy below the EOS floor")
    return GprPrim(rho, u, p, j)


def prim_to_cons(prim, material):
    rho = _as_float(prim.rho)
    if np.any(~(np.asarray(rho) > 0)):
        raise InvalidStateError("density must be positive")
    mom, rhoE, rhoj, _, T = _vectorize(prim_to_cons_kernel, material.packed, rho, prim.u, prim.p, prim.j)
    if not np.all(np.isfinite(T)):
        raise InvalidStateError("pressure not admissible for the EOS")
    return GprCons(rho, mom, rhoE, rhoj)


def prim_temperature(prim, material):
    eps = thermo.internal_energy(prim.rho, prim.p, material.eos)
    return thermo.temperature(prim.rho, eps, material.eos)


def heat_flux(prim, material):
    return material.alpha**2 * prim_temperature(prim, material) * prim.j


def physical_flux(cons, material):
    """Flux vector, shape ``(4,)`` or ``(4, N)``."""
    prim = cons_to_prim(cons, material)
    T = prim_temperature(prim, material)
    E = np.asarray(cons.rhoE) / np.asarray(prim.rho)
    F = _vectorize(flux_kernel, material.packed, 1, prim.rho, prim.u, prim.p, prim.j, T, E)
    return np.array(F, dtype=float)


def relaxation_source(cons, material):
    """Return ``(S, sigma)``: the ``rho j`` source ``-rho j / tau_H`` and the
    entropy production ``sigma = rho alpha^2 j^2 / (tau_H T) >= 0``."""
    prim = cons_to_prim(cons, material)
    if material.alpha == 0:
        z = np.zeros_like(np.asarray(prim.rho, dtype=float))
        return _as_float(z), _as_float(z)
    T = np.asarray(prim_temperature(prim, material), dtype=float)
    tau_h = np.asarray(_vectorize(relaxation_time_kernel, material.packed, prim.rho, T), dtype=float)
    j = np.asarray(prim.j, dtype=float)
    S = -np.asarray(cons.rhoj, dtype=float) / tau_h
    sigma = -S * material.alpha**2 * j / T
    return _as_float(S), _as_float(sigma)


def total_energy(prim, material):
    """Specific total energy ``eps + alpha^2 j^2 / 2 + u^2 / 2``."""
    eps = thermo.internal_energy(prim.rho, prim.p, material.eos)
    return _as_float(eps + 0.5 * material.alpha**2 * np.asarray(prim.j) ** 2 + 0.5 * np.asarray(prim.u) ** 2)


def relaxation_time(prim, material):
    T = prim_temperature(prim, material)
    return _as_float(_vectorize(relaxation_time_kernel, material.packed, prim.rho, T))


def signal_speeds(prim, material):
    """Return ``(c_s, c_h)``."""
    T = prim_temperature(prim, material)
    cs, ch = _vectorize(speeds_kernel, material.packed, 1, prim.rho, T)
    return _as_float(cs), _as_float(ch)


def max_signal_speed(prim, material):
    """``|u| + max(c_s, c_h)``: the wave-speed bound used by HLL and the CFL limit."""
    cs, ch = signal_speeds(prim, material)
    return _as_float(np.abs(prim.u) + np.maximum(cs, ch))


def characteristic_speeds(prim, material):
    """Eigenvalues of the quasi-linear flux Jacobian at a single state.

    Computed with a finite-difference Jacobian in conserved variables; used
    for diagnostics and tests of the wave-speed bound.
    """
    M = material.packed
    U0 = prim_to_cons(prim, material).as_array()

    def F(U):
        u, p, j, eps, T = cons_to_prim_kernel(M, *U)
        return np.array(flux_kernel(M, 1, U[0], u, p, j, T, U[2] / U[0]))

    J = np.empty((4, 4))
    for k in range(4):
        h = 1e-6 * max(abs(U0[k]), 1e-3 * np.max(np.abs(U0)))
        Up, Um = U0.copy(), U0.copy()
        Up[k] += h
        Um[k] -= h
        J[:, k] = (F(Up) - F(Um)) / (2 * h)
    return np.sort(np.linalg.eigvals(J).real)
