"""Integrators for the stiff relaxation of ``rho j``.

The semi-analytic update treats the homogeneous (flux) part of a stage as a
constant forcing ``P* = (J* - J^n) / dt`` and solves
``dJ/dt = -J / tau_H + P*`` exactly over the step::

    J^{n+1} = (J^n - tau_H P*) exp(-dt / tau_H) + tau_H P*

It is exact when ``P*`` is constant and stays bounded for any ``dt/tau_H``.
The explicit alternative sub-cycles forward Euler on ``dJ/dt = -J/tau_H``
after the homogeneous update (plain splitting).
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import ParameterError

SEMI_ANALYTIC = 0
EXPLICIT = 1
INTEGRATORS = {"semi_analytic": SEMI_ANALYTIC, "explicit": EXPLICIT}


@njit(cache=True, error_model="numpy", inline="always")
def semi_analytic_kernel(J_n, J_star, dt, tau_h):
    if tau_h <= 0.0:
        return 0.0
    x = dt / tau_h
    # (J^n - tau P*) e^-x + tau P*  written without the 1/x cancellation;
    # the clamp keeps exp out of the (slow) subnormal range
    xc = min(x, 700.0)
    return J_n * math.exp(-xc) - (J_star - J_n) * math.expm1(-xc) / x


@njit(cache=True, error_model="numpy", inline="always")
def explicit_kernel(J, dt, tau_h):
    if tau_h <= 0.0:
        return 0.0
    n = int(math.floor(2.0 * dt / tau_h)) + 1
    h = dt / n
    return J * (1.0 - h / tau_h) ** n


def tau_h(rho, lam, T, alpha):
    """Relaxation timescale ``rho lambda / (T alpha^2)``."""
    return rho * lam / (T * alpha * alpha)


def _check(dt, tau_h):
    if np.any(~(np.asarray(dt) > 0)):
        raise ParameterError("time step must be positive")
    if np.any(~(np.asarray(tau_h) > 0)):
        raise ParameterError("relaxation time tau_H must be positive")


def semi_analytic_update(J_n, J_star, dt, tau_h):
    """Relaxed ``rho j`` after a step of length ``dt``.

    ``J_star`` is the value after the homogeneous (flux-only) update starting
    from ``J_n``. Works elementwise on arrays.
    """
    _check(dt, tau_h)
    x = np.asarray(dt, dtype=float) / np.asarray(tau_h, dtype=float)
    J_n = np.asarray(J_n, dtype=float)
    J_star = np.asarray(J_star, dtype=float)
    out = J_n * np.exp(-x) - (J_star - J_n) * np.expm1(-x) / x
    return float(out) if out.ndim == 0 else out


def explicit_relax(J, dt, tau_h):
    """Forward-Euler sub-cycling of ``dJ/dt = -J/tau_H`` with sub-steps below ``tau_H/2``."""
    _check(dt, tau_h)
    f = np.vectorize(explicit_kernel, otypes=[float])
    out = f(np.asarray(J, dtype=float), dt, tau_h)
    return float(out) if np.ndim(out) == 0 else out


def explicit_update(J_star, dt, tau_h, substeps):
    """Forward Euler with a given number of sub-steps; each must be below ``tau_H / 2``."""
    _check(dt, tau_h)
    if int(substeps) < 1 or np.any(dt / int(substeps) >= 0.5 * np.asarray(tau_h)):
        raise ParameterError("explicit sub-step must be below tau_H / 2")
    n = int(substeps)
    out = np.asarray(J_star, dtype=float) * (1.0 - dt / n / np.asarray(tau_h)) ** n
    return float(out) if out.ndim == 0 else out


def substep_count(dt, tau_h):
    _check(dt, tau_h)
    return int(math.floor(2.0 * dt / tau_h)) + 1
