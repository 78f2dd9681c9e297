"""Sharp-interface coupling in one dimension.

The interface is a point ``x`` with the liquid on one side. Cells whose
centre lies left of ``x`` belong to the left phase. At every step the two
adjacent cells feed the interfacial Riemann solver (in a frame with the
liquid on the left); its star states become ghost values for each phase.
After the step the interface moves with ``s#`` and any cell whose centre it
crossed is refilled with the star state of its new phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SimulationError, StepSizeError
from .gpr import GprCons, GprPrim, cons_to_prim
from .hllp import solve_interface

LIQUID = 0
VAPOR = 1
INTERFACE_CFL = 0.5


@dataclass
class InterfaceTrack:
    x: float
    liquid_side: str = "left"
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.liquid_side not in ("left", "right"):
            raise ValueError("liquid_side must be 'left' or 'right'")

    @property
    def mirrored(self):
        return self.liquid_side == "right"

    @property
    def left_phase(self):
        return VAPOR if self.mirrored else LIQUID

    @property
    def right_phase(self):
        return LIQUID if self.mirrored else VAPOR


def mirror_prim(prim):
    return GprPrim(prim.rho, -prim.u, prim.p, -prim.j)


def mirror_cons(cons):
    return GprCons(cons.rho, -cons.mom, cons.rhoE, -cons.rhoj)


def phase_field(x_centers, track):
    return np.where(x_centers < track.x, track.left_phase, track.right_phase).astype(np.int64)


def interface_cell(grid, track):
    """Index of the last cell of the left phase."""
    i = int(np.searchsorted(grid.x, track.x, side="left")) - 1
    if i < 0 or i >= grid.n_cells - 1:
        raise SimulationError(f"interface at x={track.x} left the computational domain")
    return i


def gather_interface_states(grid, track):
    """Return ``(i, Q_l, Q_v)`` with the bulk states in the liquid-left frame."""
    i = interface_cell(grid, track)
    left = cons_to_prim(GprCons.from_array(grid.U[i]), grid.materials[grid.phase[i]])
    right = cons_to_prim(GprCons.from_array(grid.U[i + 1]), grid.materials[grid.phase[i + 1]])
    if track.mirrored:
        return i, mirror_prim(right), mirror_prim(left)
    return i, left, right


def solve_at_interface(grid, track, solver="hllp_mq", dp_sigma=0.0, sigma_c=None):
    i, ql, qv = gather_interface_states(grid, track)
    sol = solve_interface(
        solver, ql, qv, grid.materials[LIQUID], grid.materials[VAPOR], dp_sigma, sigma_c=sigma_c
    )
    return i, sol


def interface_speed(sol, track):
    return -sol.s_sharp if track.mirrored else sol.s_sharp


def _phys(prim, track):
    return mirror_prim(prim) if track.mirrored else prim


def ghost_states(sol, track):
    """Ghost primitives ``(gA, gB)`` for the left and right phase, physical frame."""
    sl = _phys(sol.star_l, track)
    sv = _phys(sol.star_v, track)
    a, b = (sv, sl) if track.mirrored else (sl, sv)
    return (
        np.array([a.rho, a.u, a.p, a.j], dtype=float),
        np.array([b.rho, b.u, b.p, b.j], dtype=float),
    )


def star_cons(sol, track, phase):
    cons = sol.cons_l if phase == LIQUID else sol.cons_v
    if track.mirrored:
        cons = mirror_cons(cons)
    return np.array([cons.rho, cons.mom, cons.rhoE, cons.rhoj], dtype=float)


def advect_interface(track, s, dt, dx, t=None):
    """Move the interface; the interface CFL number ``|s| dt / dx`` must not exceed 0.5."""
    if abs(s) * dt > INTERFACE_CFL * dx * (1.0 + 1e-12):
        raise StepSizeError(f"interface CFL {abs(s) * dt / dx:.3g} exceeds {INTERFACE_CFL}")
    x_old = track.x
    track.x = x_old + s * dt
    track.history.append((t, track.x, s))
    return x_old


def fill_phase_change_cells(grid, x_old, track, sol):
    """Refill cells crossed by the interface; returns the conserved-total defect.

    The defect is ``dx * sum(U_new - U_old)`` over refilled cells, i.e. the
    mass, momentum, energy and ``rho j`` injected by the refill.
    """
    lo, hi = sorted((x_old, track.x))
    crossed = np.nonzero((grid.x >= lo) & (grid.x < hi))[0]
    defect = np.zeros(4)
    for i in crossed:
        new_phase = track.left_phase if grid.x[i] < track.x else track.right_phase
        if new_phase == grid.phase[i]:
            continue
        U_new = star_cons(sol, track, new_phase)
        defect += grid.dx * (U_new - grid.U[i])
        grid.U[i] = U_new
        grid.phase[i] = new_phase
    return defect, crossed
