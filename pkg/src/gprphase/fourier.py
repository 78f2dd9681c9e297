"""Euler-Fourier reference: compressible Euler plus explicit Fourier conduction.

Each step is a full RK4 Euler update (same MUSCL/HLL discretization, no
thermal impulse) followed by one explicit centred diffusion step on the
energy, ``rho E += dt d/dx (lambda dT/dx)``. Stability of the diffusion
step requires ``dt <= dx^2 / (2 d)`` with ``d = lambda / (rho c_v)``.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import _kernels as K
from .errors import ParameterError
from .solver import SolverConfig, _bc_arrays, compute_dt, run, step


def diffusivity(grid):
    """Largest thermal diffusivity ``lambda / (rho c_v)`` on the grid."""
    return K.max_diffusivity(grid.U, grid.mats, grid.phase)


def parabolic_dt(grid):
    d = diffusivity(grid)
    return np.inf if d == 0 else 0.5 * grid.dx**2 / d


def reference_config(config=None, **kw):
    base = config if config is not None else SolverConfig()
    return replace(base, model="euler_fourier", **kw)


def step_euler_fourier(grid, dt, config=None):
    """One Euler-Fourier step in place; raises when ``dt`` breaks the parabolic bound."""
    config = reference_config(config)
    if dt > parabolic_dt(grid) * (1.0 + 1e-12):
        raise ParameterError("time step exceeds the explicit diffusion limit")
    return step(grid, dt, config)


def conduct(grid, dt, config=None):
    """Diffusion sub-step alone; returns the left/right wall heat fluxes."""
    config = reference_config(config)
    if dt > parabolic_dt(grid) * (1.0 + 1e-12):
        raise ParameterError("time step exceeds the explicit diffusion limit")
    kinds, par = _bc_arrays(grid, config)
    return K.diffuse(grid.U, dt, grid.dx, grid.mats, grid.phase, kinds, par)


def run_reference(grid, t_end, config=None, **kw):
    return run(grid, reference_config(config), t_end, **kw)


__all__ = ["diffusivity", "parabolic_dt", "step_euler_fourier", "conduct", "run_reference", "compute_dt"]
