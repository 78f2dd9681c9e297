"""Kinetic phase-transition closure at a liquid-vapor interface.

Fluxes follow linear force-flux relations::

    mdot = L_mm F_m + L_me F_e
    q_v  = L_me F_m + L_ee F_e

with forces ``F_m = [(-g + h_v)/T]`` and ``F_e = [1/T]``, where
``[z] = z_v - z_l`` and ``h_v`` is the vapor-side enthalpy. The coefficients
come from kinetic theory (Cipolla-type) and the condensation coefficient
from a Nagayama-type transition-state model. ``mdot > 0`` means evaporation.
Interfacial entropy production is ``chi = mdot F_m + q_v F_e``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import thermo
from .errors import ParameterError, SingularStateError

SIGMA_MIN = 1e-4
SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class OnsagerClosure:
    sigma_c: float
    k1: float
    k2: float
    k3: float
    L_mm: float
    L_me: float
    L_ee: float

    @property
    def L_em(self):
        return self.L_me

    @property
    def matrix(self):
        return np.array([[self.L_mm, self.L_me], [self.L_me, self.L_ee]])


@dataclass(frozen=True)
class PhaseFluxes:
    mdot: float
    q_v: float
    chi: float
    F_m: float
    F_e: float
    closure: OnsagerClosure


CLAMP_COUNT = {"low": 0, "high": 0}


def condensation_coefficient(rho_l, rho_v, rho_c=None):
    """Condensation coefficient from the free-volume ratio of the phases.

    ``nu = 1/rho - 1/(3 rho_c)``, ``x = (nu_l / nu_v)^(1/3)`` and
    ``sigma = (1 - x) exp(-1 / (2 (1/x - 1)))``, clamped to
    ``[SIGMA_MIN, 1]``; ``CLAMP_COUNT`` records clamp engagements. Without
    ``rho_c`` the plain specific volumes are used.
    """
    if not (rho_l > 0 and rho_v > 0):
        raise ParameterError("densities must be positive")
    b = 0.0 if rho_c is None else 1.0 / (3.0 * rho_c)
    nu_l = 1.0 / rho_l - b
    nu_v = 1.0 / rho_v - b
    if not (nu_l > 0 and nu_v > 0):
        raise ParameterError("density beyond the packing limit 3 rho_c")
    x = (nu_l / nu_v) ** (1.0 / 3.0)
    if x >= 1.0:
        CLAMP_COUNT["low"] += 1
        return SIGMA_MIN
    sigma = (1.0 - x) * math.exp(-0.5 / (1.0 / x - 1.0))
    if sigma > 1.0:
        CLAMP_COUNT["high"] += 1
        return 1.0
    if sigma < SIGMA_MIN:
        CLAMP_COUNT["low"] += 1
        return SIGMA_MIN
    return float(sigma)


def k_coefficients(sigma_c):
    if not sigma_c > 0:
        raise ParameterError("condensation coefficient must be positive")
    k1 = 9.0 / 8.0 * SQRT_PI * (0.5 + 16.0 / (9.0 * math.pi)) - SQRT_PI * (1.0 - sigma_c) / sigma_c
    k2 = 0.5 * SQRT_PI * (0.5 + 52.0 / (25.0 * math.pi))
    k3 = 0.25 * SQRT_PI * (0.5 + 8.0 / (5.0 * math.pi))
    return k1, k2, k3


def onsager_coefficients(rho_v, T_l, R, p_s, k):
    """Onsager coefficients ``(L_mm, L_me, L_ee)``.

    Positive signs and ``sqrt(2 R T_l)`` in the last two entries make the
    matrix dimensionally consistent and positive definite, so that with
    ``[z] = z_v - z_l`` evaporation gives ``mdot > 0`` and ``chi >= 0``.
    """
    k1, k2, k3 = k
    det = k1 * k2 - k3 * k3
    if det == 0:
        raise SingularStateError("singular kinetic closure: k1 k2 - k3^2 = 0")
    L_mm = k2 / det * rho_v * math.sqrt(2.0 * T_l / R)
    L_me = k3 / det * rho_v * T_l * math.sqrt(2.0 * R * T_l)
    L_ee = k1 / det * p_s * T_l * math.sqrt(2.0 * R * T_l)
    return L_mm, L_me, L_ee


def build_closure(rho_l, rho_v, T_l, eos, sigma_c=None):
    """Closure for star densities and liquid temperature (Peng-Robinson only)."""
    if sigma_c is None:
        sigma_c = condensation_coefficient(rho_l, rho_v, getattr(eos, "rho_c", None))
    k = k_coefficients(sigma_c)
    p_s = thermo.saturation_pressure(T_l, eos)
    L = onsager_coefficients(rho_v, T_l, eos.R, p_s, k)
    return OnsagerClosure(sigma_c, *k, *L)


def thermodynamic_forces(rho_l, T_l, p_l, rho_v, T_v, p_v, eos):
    """Return ``(F_m, F_e)``; the enthalpy in both terms is the vapor one."""
    g_l = thermo.gibbs(rho_l, T_l, p_l, eos)
    g_v = thermo.gibbs(rho_v, T_v, p_v, eos)
    h_v = thermo.internal_energy_rho_T(rho_v, T_v, eos) + p_v / rho_v
    F_m = (h_v - g_v) / T_v - (h_v - g_l) / T_l
    F_e = 1.0 / T_v - 1.0 / T_l
    return float(F_m), float(F_e)


def phase_transition_fluxes(rho_l, T_l, p_l, rho_v, T_v, p_v, eos, sigma_c=None):
    """Micro model: ``(mdot, q_v, chi)`` plus forces and the closure used."""
    closure = build_closure(rho_l, rho_v, T_l, eos, sigma_c)
    F_m, F_e = thermodynamic_forces(rho_l, T_l, p_l, rho_v, T_v, p_v, eos)
    mdot = closure.L_mm * F_m + closure.L_me * F_e
    q_v = closure.L_me * F_m + closure.L_ee * F_e
    chi = mdot * F_m + q_v * F_e
    return PhaseFluxes(mdot, q_v, chi, F_m, F_e, closure)
