"""Scenario files: INI sections read with :mod:`configparser`.

Schema (keys are case sensitive, units SI unless the scenario says otherwise)::

    [run]        t_end, cells, x_min, x_max, cfl, model, source_integrator,
                 interface_solver, dp_sigma, sigma_c, closure, snapshots, cases
    [eos]        kind = ideal | stiffened | peng_robinson and its parameters
    [material]   lambda, tau_model, rho0, T0  (single phase)
    [liquid] / [vapor]
                 per-phase material keys (two-phase); eos keys may be overridden
    [left] / [right]
                 initial primitive state: rho or T, u, p, j
    [interface]  x, liquid_side
    [boundary.left] / [boundary.right]
                 kind, T_B, h, h_factor, rho, u, p, j
    [case NAME]  overrides written as ``section.key = value``

``rho0``/``T0`` default to the initial state of the phase.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from . import thermo
from .errors import ParameterError
from .ghost import LIQUID, VAPOR, InterfaceTrack
from .gpr import GprPrim, Material
from .solver import Boundary, Grid1D, SolverConfig

SCENARIO_DIR = Path(__file__).parent / "scenarios"
CLOSURES = ("cipolla",)


class ConfigError(ParameterError):
    pass


@dataclass
class Scenario:
    name: str
    grid: Grid1D
    config: SolverConfig
    t_end: float
    track: InterfaceTrack | None = None
    snapshots: tuple = ()
    meta: dict = field(default_factory=dict)


def bundled(name):
    p = SCENARIO_DIR / name
    if not p.suffix:
        p = p.with_suffix(".cfg")
    return p


def read(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    path = Path(path)
    if not path.exists() and bundled(path.name).exists():
        path = bundled(path.name)
    if not cp.read(path):
        raise ConfigError(f"cannot read scenario file {path}")
    return cp


def case_names(cp):
    raw = cp.get("run", "cases", fallback="").replace(",", " ").split()
    return raw


def apply_case(cp, case):
    sec = f"case {case}"
    if not cp.has_section(sec):
        raise ConfigError(f"[{sec}]: no such case")
    for key, value in cp.items(sec):
        if "." not in key:
            raise ConfigError(f"[{sec}] {key}: overrides must be written as section.key")
        s, k = key.rsplit(".", 1)
        if not cp.has_section(s):
            cp.add_section(s)
        cp.set(s, k, value)


def apply_overrides(cp, overrides):
    for item in overrides or ():
        key, _, value = item.partition("=")
        if "." not in key or not _:
            raise ConfigError(f"override {item!r}: expected section.key=value")
        s, k = key.strip().rsplit(".", 1)
        if not cp.has_section(s):
            cp.add_section(s)
        cp.set(s, k, value.strip())


def _float(cp, sec, key, default=None):
    if not cp.has_option(sec, key):
        if default is None:
            raise ConfigError(f"[{sec}] {key}: missing")
        return default
    try:
        return float(cp.get(sec, key))
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: not a number: {cp.get(sec, key)!r}") from None


def _opt_float(cp, sec, key):
    if not cp.has_option(sec, key) or cp.get(sec, key).strip().lower() in ("", "none", "auto"):
        return None
    return _float(cp, sec, key)


def _eos(cp, sec):
    """EOS from ``[eos]`` with keys optionally overridden in ``sec``."""
    def get(key, default=None):
        for s in (sec, "eos"):
            if s and cp.has_option(s, key):
                return _float(cp, s, key)
        if default is None:
            raise ConfigError(f"[eos] {key}: missing")
        return default

    kind = cp.get(sec, "eos", fallback=None) if sec else None
    kind = kind or cp.get("eos", "kind", fallback=None)
    if kind is None:
        raise ConfigError("[eos] kind: missing")
    try:
        if kind == "ideal":
            return thermo.IdealGas(get("gamma"), get("cv"))
        if kind == "stiffened":
            return thermo.StiffenedGas(get("gamma"), get("p_inf"), get("cv"))
        if kind == "peng_robinson":
            return thermo.PengRobinson(get("rho_c"), get("p_c"), get("T_c"), get("M"), get("omega"), get("cv"))
    except ValueError as exc:
        raise ConfigError(f"[eos] {exc}") from None
    raise ConfigError(f"[eos] kind: unknown EOS {kind!r}")


def _tau_model(cp, sec):
    v = cp.get(sec, "tau_model", fallback="kinetic").strip()
    if v in ("kinetic", "thermomass"):
        return v
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"[{sec}] tau_model: expected kinetic, thermomass or a number") from None


def _state(cp, sec, eos):
    u = _float(cp, sec, "u", 0.0)
    p = _float(cp, sec, "p")
    j = _float(cp, sec, "j", 0.0)
    if cp.has_option(sec, "rho"):
        rho = _float(cp, sec, "rho")
    elif cp.has_option(sec, "T"):
        rho = _density_from_T_p(eos, _float(cp, sec, "T"), p)
    else:
        raise ConfigError(f"[{sec}] rho or T: missing")
    return GprPrim(rho, u, p, j)


def _density_from_T_p(eos, T, p):
    if isinstance(eos, thermo.IdealGas):
        return p / ((eos.gamma - 1.0) * eos.cv * T)
    if isinstance(eos, thermo.StiffenedGas):
        return (p + eos.p_inf) / ((eos.gamma - 1.0) * eos.cv * T)
    raise ConfigError("give rho explicitly for a Peng-Robinson state")


def _material(cp, sec, eos, state):
    lam = _float(cp, sec, "lambda")
    rho0 = _float(cp, sec, "rho0", state.rho)
    T0 = cp.get(sec, "T0", fallback=None)
    T0 = float(T0) if T0 is not None else float(thermo.temperature_rho_p(state.rho, state.p, eos))
    try:
        return Material(eos, lam, rho0, T0, _tau_model(cp, sec))
    except ParameterError as exc:
        raise ConfigError(f"[{sec}] {exc}") from None


def _boundary(cp, side):
    sec = f"boundary.{side}"
    if not cp.has_section(sec):
        return Boundary()
    kind = cp.get(sec, "kind", fallback="transmissive")
    state = None
    if kind == "inflow":
        state = tuple(_float(cp, sec, k, 0.0 if k in ("u", "j") else None) for k in ("rho", "u", "p", "j"))
    try:
        return Boundary(
            kind, _float(cp, sec, "T_B", 0.0), _opt_float(cp, sec, "h"), _float(cp, sec, "h_factor", 100.0), state
        )
    except ParameterError as exc:
        raise ConfigError(f"[{sec}] {exc}") from None


def build(cp, name="scenario"):
    """Scenario from a parsed (and case-resolved) config."""
    if not cp.has_section("run"):
        raise ConfigError("[run]: missing section")
    n = int(_float(cp, "run", "cells"))
    x_min = _float(cp, "run", "x_min", 0.0)
    x_max = _float(cp, "run", "x_max")
    closure = cp.get("run", "closure", fallback="cipolla")
    if closure not in CLOSURES:
        raise ConfigError(f"[run] closure: unknown closure {closure!r}")
    try:
        config = SolverConfig(
            cfl=_float(cp, "run", "cfl", 0.8),
            model=cp.get("run", "model", fallback="gpr"),
            integrator=cp.get("run", "source_integrator", fallback="semi_analytic"),
            interface_solver=cp.get("run", "interface_solver", fallback="hllp_mq"),
            dp_sigma=_float(cp, "run", "dp_sigma", 0.0),
            sigma_c=_opt_float(cp, "run", "sigma_c"),
            left=_boundary(cp, "left"),
            right=_boundary(cp, "right"),
        )
    except ParameterError as exc:
        raise ConfigError(f"[run] {exc}") from None
    t_end = _float(cp, "run", "t_end")
    snaps = tuple(float(s) for s in cp.get("run", "snapshots", fallback="").replace(",", " ").split())
    track = None
    if cp.has_section("interface"):
        x_if = _float(cp, "interface", "x")
        side = cp.get("interface", "liquid_side", fallback="left")
        if side not in ("left", "right"):
            raise ConfigError("[interface] liquid_side: expected left or right")
        if not x_min < x_if < x_max:
            raise ConfigError("[interface] x: outside the domain")
        track = InterfaceTrack(x_if, side)
        eos_l, eos_v = _eos(cp, "liquid"), _eos(cp, "vapor")
        left_sec, right_sec = ("liquid", "vapor") if side == "left" else ("vapor", "liquid")
        st = {"liquid": None, "vapor": None}
        st[left_sec] = _state(cp, "left", eos_l if left_sec == "liquid" else eos_v)
        st[right_sec] = _state(cp, "right", eos_l if right_sec == "liquid" else eos_v)
        mats = (_material(cp, "liquid", eos_l, st["liquid"]), _material(cp, "vapor", eos_v, st["vapor"]))
        phases = (track.left_phase, track.right_phase)
        grid = Grid1D.piecewise(x_min, x_max, n, mats, [st[left_sec], st[right_sec]], x_if, phases)
    else:
        eos = _eos(cp, "material")
        left = _state(cp, "left", eos)
        right = _state(cp, "right", eos) if cp.has_section("right") else None
        mat = _material(cp, "material", eos, left)
        if right is None:
            grid = Grid1D.piecewise(x_min, x_max, n, (mat,), [left])
        else:
            x_split = _float(cp, "run", "x_split", 0.5 * (x_min + x_max))
            grid = Grid1D.piecewise(x_min, x_max, n, (mat,), [left, right], x_split, (0, 0))
    meta = {
        "alpha": [m.alpha for m in grid.materials],
        "tau": [m.tau for m in grid.materials],
        "lambda": [m.lam for m in grid.materials],
    }
    return Scenario(name, grid, config, t_end, track, snaps, meta)


def load(path, case=None, overrides=()):
    """Scenario list for a file: one per case (or the file as is)."""
    cp0 = read(path)
    stem = Path(path).stem
    cases = [case] if case else case_names(cp0)
    if not cases:
        cp = read(path)
        apply_overrides(cp, overrides)
        return [build(cp, stem)]
    out = []
    for c in cases:
        cp = read(path)
        apply_case(cp, c)
        apply_overrides(cp, overrides)
        out.append(build(cp, f"{stem}-{c}"))
    return out


__all__ = ["Scenario", "ConfigError", "load", "build", "read", "bundled", "LIQUID", "VAPOR"]
