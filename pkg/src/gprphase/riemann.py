"""HLL flux for the GPR system and minmod MUSCL reconstruction."""
from __future__ import annotations

import numpy as np
from numba import njit

from .errors import InvalidStateError
from .gpr import K_ALPHA, flux_kernel, speeds_kernel
from .thermo import eos_eps_rho_p, eos_T_rho_eps


@njit(cache=True, error_model="numpy", inline="always")
def minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    return a if abs(a) < abs(b) else b


@njit(cache=True, error_model="numpy", inline="always")
def hll_kernel(ML, MR, heat, rL, uL, pL, jL, rR, uR, pR, jR):
    """HLL flux between two primitive states, possibly of different materials.

    Wave speeds are Davis estimates with ``a = max(c_s, c_h)`` per side.
    Returns the four flux components and an ok flag.
    """
    eL = eos_eps_rho_p(ML, rL, pL)
    eR = eos_eps_rho_p(MR, rR, pR)
    TL = eos_T_rho_eps(ML, rL, eL)
    TR = eos_T_rho_eps(MR, rR, eR)
    csL, chL = speeds_kernel(ML, heat, rL, TL)
    csR, chR = speeds_kernel(MR, heat, rR, TR)
    aL = max(csL, chL)
    aR = max(csR, chR)
    if not (aL > 0.0 and aR > 0.0 and rL > 0.0 and rR > 0.0):
        return 0.0, 0.0, 0.0, 0.0, False
    alL = ML[K_ALPHA] if heat else 0.0
    alR = MR[K_ALPHA] if heat else 0.0
    EL = eL + 0.5 * alL * alL * jL * jL + 0.5 * uL * uL
    ER = eR + 0.5 * alR * alR * jR * jR + 0.5 * uR * uR
    sL = min(uL - aL, uR - aR)
    sR = max(uL + aL, uR + aR)
    f0, f1, f2, f3 = flux_kernel(ML, heat, rL, uL, pL, jL, TL, EL)
    if sL >= 0.0:
        return f0, f1, f2, f3, True
    g0, g1, g2, g3 = flux_kernel(MR, heat, rR, uR, pR, jR, TR, ER)
    if sR <= 0.0:
        return g0, g1, g2, g3, True
    w = 1.0 / (sR - sL)
    ss = sL * sR
    h0 = (sR * f0 - sL * g0 + ss * (rR - rL)) * w
    h1 = (sR * f1 - sL * g1 + ss * (rR * uR - rL * uL)) * w
    h2 = (sR * f2 - sL * g2 + ss * (rR * ER - rL * EL)) * w
    h3 = (sR * f3 - sL * g3 + ss * (rR * jR - rL * jL)) * w
    if not heat:
        h3 = 0.0
    return h0, h1, h2, h3, True


def hll_flux(left, right, material, material_right=None, heat=True):
    """HLL flux between primitive states ``left`` and ``right``."""
    MR = material.packed if material_right is None else material_right.packed
    h0, h1, h2, h3, ok = hll_kernel(
        material.packed, MR, int(heat),
        float(left.rho), float(left.u), float(left.p), float(left.j),
        float(right.rho), float(right.u), float(right.p), float(right.j),
    )
    out = np.array([h0, h1, h2, h3])
    if not ok or not np.all(np.isfinite(out)):
        raise InvalidStateError("HLL flux undefined for these states")
    return out


def reconstruct_muscl(W):
    """Minmod-limited face states of cell primitives ``W`` with shape ``(N, nvar)``.

    Returns ``(WL, WR)``, each ``(N-1, nvar)``: the states on the left and
    right of the interior faces. End cells use zero slope.
    """
    W = np.asarray(W, dtype=float)
    dl = np.diff(W, axis=0)
    slope = np.zeros_like(W)
    a, b = dl[:-1], dl[1:]
    slope[1:-1] = np.where(a * b > 0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)
    return W[:-1] + 0.5 * slope[:-1], W[1:] - 0.5 * slope[1:]

