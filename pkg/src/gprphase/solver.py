"""Finite-volume driver: grid, time step, RK4 stepping and run loops.

Second-order MUSCL (minmod, primitive variables) with the HLL flux and
classical RK4. The stiff ``rho j`` relaxation is applied to every stage
value as a step of the matching length from ``U^n``. Two-phase runs solve
the interfacial Riemann problem once per step and keep its ghost states
for all four stages.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import ghost
from .errors import ParameterError, SimulationError
from .gpr import GprCons, GprPrim, prim_to_cons
from .relax import INTEGRATORS
from .thermo import PengRobinson, eos_T_rho_eps

MODELS = ("gpr", "euler_fourier", "euler")
BOUNDARY_KINDS = {
    "transmissive": K.TRANSMISSIVE,
    "reflective": K.REFLECTIVE,
    "heat_flux_wall": K.HEAT_WALL,
    "inflow": K.INFLOW,
}


@dataclass(frozen=True)
class Boundary:
    """Boundary condition of one domain end.

    ``heat_flux_wall`` is a no-slip wall with a Newton-type heat flux
    ``q = rho h (T_B - T)`` into the domain; ``h`` defaults to
    ``h_factor * lambda`` of the adjacent material.
    """

    kind: str = "transmissive"
    T_B: float = 0.0
    h: float | None = None
    h_factor: float = 100.0
    state: tuple | None = None

    def __post_init__(self):
        if self.kind not in BOUNDARY_KINDS:
            raise ParameterError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "inflow" and self.state is None:
            raise ParameterError("inflow boundary needs a (rho, u, p, j) state")


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.8
    model: str = "gpr"
    integrator: str = "semi_analytic"
    interface_solver: str = "hllp_mq"
    dp_sigma: float = 0.0
    sigma_c: float | None = None
    left: Boundary = field(default_factory=Boundary)
    right: Boundary = field(default_factory=Boundary)
    max_steps: int = 2**62

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}")
        if self.integrator not in INTEGRATORS:
            raise ParameterError(f"unknown source integrator {self.integrator!r}")
        if not 0 < self.cfl <= 1:
            raise ParameterError("cfl must lie in (0, 1]")

    @property
    def heat(self):
        return 1 if self.model == "gpr" else 0

    @property
    def fourier(self):
        return self.model == "euler_fourier"


@dataclass
class Grid1D:
    x_min: float
    x_max: float
    U: np.ndarray
    phase: np.ndarray
    materials: tuple

    def __post_init__(self):
        self.U = np.ascontiguousarray(self.U, dtype=float)
        self.phase = np.ascontiguousarray(self.phase, dtype=np.int64)
        self.materials = tuple(self.materials)
        if self.U.ndim != 2 or self.U.shape[1] != 4 or self.U.shape[0] < 4:
            raise ParameterError("U must have shape (N, 4) with N >= 4")
        if self.phase.shape != (self.U.shape[0],):
            raise ParameterError("phase must have one entry per cell")
        if not self.x_max > self.x_min:
            raise ParameterError("empty domain")

    @property
    def n_cells(self):
        return self.U.shape[0]

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def x(self):
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def mats(self):
        return np.ascontiguousarray(np.stack([m.packed for m in self.materials]))

    def copy(self):
        return Grid1D(self.x_min, self.x_max, self.U.copy(), self.phase.copy(), self.materials)

    def totals(self):
        return self.U.sum(axis=0) * self.dx

    def fields(self, heat=True):
        """Primitive profiles ``rho, u, p, T, j, q`` and ``phase``."""
        n = self.n_cells
        out = {k: np.empty(n) for k in ("rho", "u", "p", "T", "j", "q")}
        for i in range(n):
            m = self.materials[self.phase[i]]
            rho, mom, E, J = self.U[i]
            u = mom / rho
            j = J / rho if heat else 0.0
            a = m.alpha if heat else 0.0
            eps = E / rho - 0.5 * u * u - 0.5 * a * a * j * j
            T = eos_T_rho_eps(m.packed, rho, eps)
            p = K.cons_to_prim_kernel(m.packed, rho, mom, E, J if heat else 0.0)[1]
            out["rho"][i], out["u"][i], out["p"][i] = rho, u, p
            out["T"][i], out["j"][i], out["q"][i] = T, j, a * a * T * j
        out["phase"] = self.phase.copy()
        return out

    @classmethod
    def piecewise(cls, x_min, x_max, n, materials, states, x_split=None, phases=(0, 1)):
        """Uniform (one primitive state) or two-state initial data split at ``x_split``."""
        x = x_min + (np.arange(n) + 0.5) * (x_max - x_min) / n
        left = np.ones(n, bool) if x_split is None else x < x_split
        ph = np.where(left, phases[0], phases[1]).astype(np.int64)
        U = np.empty((n, 4))
        for mask, s, k in ((left, states[0], phases[0]), (~left, states[-1], phases[1])):
            if mask.any():
                c = prim_to_cons(s, materials[k])
                U[mask] = [c.rho, c.mom, c.rhoE, c.rhoj]
        return cls(x_min, x_max, U, ph, materials)


def _bc_arrays(grid, config):
    kinds = np.zeros(2, dtype=np.int64)
    par = np.zeros((2, K.NBP))
    for side, (b, cell) in enumerate(((config.left, 0), (config.right, grid.n_cells - 1))):
        kinds[side] = BOUNDARY_KINDS[b.kind]
        par[side, K.BP_TB] = b.T_B
        lam = grid.materials[grid.phase[cell]].lam
        par[side, K.BP_H] = b.h if b.h is not None else b.h_factor * lam
        if b.state is not None:
            par[side, K.BP_STATE:K.BP_STATE + 4] = b.state
        if b.kind == "heat_flux_wall" and config.heat and lam <= 0:
            raise ParameterError("heat-flux wall needs a conducting material")
    return kinds, par


def _fast_path(grid, track):
    return track is None and len(set(grid.phase.tolist())) == 1 and len(grid.materials) == 1 and not isinstance(
        grid.materials[0].eos, PengRobinson
    )


def compute_dt(grid, config, s_sharp=None):
    """Largest stable step: hyperbolic CFL, the explicit parabolic limit in
    Euler-Fourier mode and the interface guard ``|s#| dt <= 0.5 dx``."""
    smax = K.max_speed(grid.U, grid.mats, grid.phase, config.heat)
    if not (np.isfinite(smax) and smax > 0):
        raise SimulationError("non-physical state: no finite signal speed")
    dt = config.cfl * grid.dx / smax
    if config.fourier:
        d = K.max_diffusivity(grid.U, grid.mats, grid.phase)
        if d > 0:
            dt = min(dt, 0.5 * grid.dx**2 / d)
    if s_sharp is not None and s_sharp != 0:
        dt = min(dt, ghost.INTERFACE_CFL * grid.dx / abs(s_sharp))
    return dt


@dataclass
class StepReport:
    dt: float
    fluxes: np.ndarray  # RK-weighted: left, right boundary, interface FA, FB
    conduction: tuple = (0.0, 0.0)
    refill: np.ndarray = field(default_factory=lambda: np.zeros(4))
    solution: object = None

    def budget(self):
        """Predicted change of the conserved totals from the fluxes and refill."""
        F = self.fluxes
        d = self.dt * (F[0] - F[1]) + self.dt * (F[3] - F[2]) + self.refill
        d = d.copy()
        d[2] += self.dt * (self.conduction[0] - self.conduction[1])
        return d


def step(grid, dt, config, track=None, solution=None, t=None):
    """Advance ``grid`` (in place) by one RK4 step of length ``dt``.

    With an interface ``track`` the interfacial Riemann problem is solved
    (unless ``solution`` is supplied), the interface advected and crossed
    cells refilled.
    """
    if not dt > 0:
        raise ParameterError("time step must be positive")
    kinds, par = _bc_arrays(grid, config)
    acc = np.zeros((4, 4))
    integ = INTEGRATORS[config.integrator]
    if track is None:
        iface, gA, gB = -1, np.zeros(4), np.zeros(4)
    else:
        if config.model != "gpr":
            raise ParameterError("two-phase runs require the gpr model")
        if solution is None:
            _, solution = ghost.solve_at_interface(
                grid, track, config.interface_solver, config.dp_sigma, config.sigma_c
            )
        iface = ghost.interface_cell(grid, track)
        gA, gB = ghost.ghost_states(solution, track)
    fast = 1 if _fast_path(grid, track) else 0
    ok = K.rk4_step(
        grid.U, dt, grid.dx, grid.mats, grid.phase, config.heat, integ, kinds, par, iface, gA, gB, acc, fast
    )
    if not ok:
        raise SimulationError("non-physical state produced during the step")
    report = StepReport(dt, acc, solution=solution)
    if config.fourier:
        report.conduction = K.diffuse(grid.U, dt, grid.dx, grid.mats, grid.phase, kinds, par)
    if track is not None:
        s = ghost.interface_speed(solution, track)
        x_old = ghost.advect_interface(track, s, dt, grid.dx, t)
        report.refill, _ = ghost.fill_phase_change_cells(grid, x_old, track, solution)
    return report


@dataclass
class RunResult:
    t: float
    steps: int
    wall_seconds: float
    snapshots: list
    budget: np.ndarray
    interface: list = field(default_factory=list)

    def summary(self):
        return {"t_end": self.t, "steps": self.steps, "wall_seconds": self.wall_seconds}


def run(grid, config, t_end, track=None, t0=0.0, snapshot_times=(), on_step=None):
    """Advance to ``t_end``; returns step count, wall time and snapshots.

    Single-phase runs use the compiled loop; two-phase runs loop in Python
    around one interfacial solve per step. ``snapshot_times`` are hit
    exactly and each snapshot is ``(t, fields)``.
    """
    if not t_end > t0:
        raise ParameterError("t_end must exceed the start time")
    targets = sorted({float(s) for s in snapshot_times if t0 < s < t_end} | {float(t_end)})
    snaps = []
    budget = np.zeros(4)
    iface_log = []
    t = t0
    steps = 0
    start = time.perf_counter()
    if track is None:
        kinds, par = _bc_arrays(grid, config)
        integ = INTEGRATORS[config.integrator]
        fast = 1 if _fast_path(grid, None) else 0
        mats = grid.mats
        for target in targets:
            bud = np.zeros((2, 4))
            t, n, status = K.advance(
                grid.U, t, target, grid.dx, config.cfl, mats, grid.phase, config.heat, integ,
                config.fourier, kinds, par, config.max_steps - steps, bud, fast,
            )
            steps += n
            budget += bud[0] - bud[1]
            if status != K.STATUS_OK:
                raise SimulationError(
                    f"run stopped at t={t:.6g} after {steps} steps (status {status})"
                )
            snaps.append((t, grid.fields(config.heat)))
    else:
        for target in targets:
            while t < target:
                i, sol = ghost.solve_at_interface(
                    grid, track, config.interface_solver, config.dp_sigma, config.sigma_c
                )
                s = ghost.interface_speed(sol, track)
                dt = compute_dt(grid, config, s)
                last = t + dt >= target
                if last:
                    dt = target - t
                rep = step(grid, dt, config, track, sol, t)
                budget += rep.budget()
                t = target if last else t + dt
                steps += 1
                iface_log.append(
                    dict(t=t, x=track.x, s=s, mdot=sol.mdot, q_v=sol.q_v, q_l=sol.q_l, chi=sol.chi,
                         delta_T=sol.delta_T, sigma_c=sol.fluxes.closure.sigma_c,
                         iterations=sol.iterations, refill=rep.refill.tolist())
                )
                if on_step is not None:
                    on_step(t, grid, rep)
                if steps >= config.max_steps and t < t_end:
                    raise SimulationError("maximum number of steps reached")
            snaps.append((t, grid.fields(config.heat)))
    wall = time.perf_counter() - start
    return RunResult(t, steps, wall, snaps, budget, iface_log)


__all__ = [
    "Boundary", "SolverConfig", "Grid1D", "StepReport", "RunResult",
    "compute_dt", "step", "run", "GprPrim", "GprCons",
]
