"""Command line: run scenarios, compare runs, mesh-convergence tables.

    gprphase run heat_conduction.cfg --case lam1e-3 --out runs/
    gprphase run dodecane_shocktube.cfg --solver hllp_m --cells 600
    gprphase run dodecane_shocktube.cfg --convergence 150,300,600,1200
    gprphase compare runs/a runs/b
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, config
from .errors import GprError

log = logging.getLogger("gprphase")

FIELDS = ("x", "rho", "u", "p", "T", "j", "q", "phase")
UNITS = {
    "x": "m", "rho": "kg/m^3", "u": "m/s", "p": "Pa", "T": "K",
    "j": "K s m^2/kg", "q": "W/m^2", "phase": "-",
}


class UsageError(Exception):
    pass


def snapshot_name(t):
    return f"t_{t:.6e}.csv"


def write_csv(path, grid, fields):
    cols = [grid.x] + [fields[k] for k in FIELDS[1:]]
    header = ",".join(f"{k} [{UNITS[k]}]" for k in FIELDS)
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="", fmt="%.17g")


def read_csv(path):
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    names = [h.split("[")[0].strip() for h in header]
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {n: data[:, k] for k, n in enumerate(names)}


def _overrides(args):
    out = list(args.set or [])
    if args.solver:
        out.append(f"run.interface_solver={args.solver}")
    if args.model:
        out.append(f"run.model={args.model}")
    if args.integrator:
        out.append(f"run.source_integrator={args.integrator}")
    if args.cells:
        out.append(f"run.cells={args.cells}")
    if args.cfl:
        out.append(f"run.cfl={args.cfl}")
    return out


def interface_summary(log_rows, track):
    if not log_rows:
        return None
    mdot = [r["mdot"] for r in log_rows]
    refill = np.sum([r["refill"] for r in log_rows], axis=0)
    return {
        "x_final": track.x,
        "s_final": log_rows[-1]["s"],
        "mdot_first": mdot[0],
        "mdot_final": mdot[-1],
        "mdot_min": min(mdot),
        "mdot_max": max(mdot),
        "q_v_final": log_rows[-1]["q_v"],
        "q_l_final": log_rows[-1]["q_l"],
        "chi_min": min(r["chi"] for r in log_rows),
        "sigma_c_final": log_rows[-1]["sigma_c"],
        "max_iterations": max(r["iterations"] for r in log_rows),
        "refill_defect": refill.tolist(),
    }


def run_scenario(sc, out_dir=None):
    """Run one scenario; writes CSV snapshots and ``summary.json`` when ``out_dir`` is set."""
    from .solver import run

    g0 = sc.grid.totals()
    res = run(sc.grid, sc.config, sc.t_end, sc.track, snapshot_times=sc.snapshots)
    summary = {
        "scenario": sc.name,
        "version": __version__,
        "cells": sc.grid.n_cells,
        "model": sc.config.model,
        "source_integrator": sc.config.integrator,
        "interface_solver": sc.config.interface_solver if sc.track else None,
        "cfl": sc.config.cfl,
        "t_end": res.t,
        "steps": res.steps,
        "wall_seconds": res.wall_seconds,
        "alpha": sc.meta["alpha"],
        "tau": sc.meta["tau"],
        "snapshots": [snapshot_name(t) for t, _ in res.snapshots],
        "conservation_defect": (sc.grid.totals() - g0 - res.budget)[:3].tolist(),
        "interface": interface_summary(res.interface, sc.track),
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for t, f in res.snapshots:
            write_csv(out_dir / snapshot_name(t), sc.grid, f)
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return res, summary


def restrict(a, k):
    """Average groups of ``k`` fine cells onto the coarse grid."""
    return np.asarray(a).reshape(-1, k).mean(axis=1)


def convergence_table(results, fields=("rho", "u", "p", "T", "j")):
    """L2 differences between successive resolutions on the coarser grid.

    ``results`` maps cell count to ``(dx, fields)``.
    """
    ns = sorted(results)
    rows = []
    for a, b in zip(ns[:-1], ns[1:]):
        if b % a:
            raise UsageError(f"resolutions {a} and {b} are not nested")
        dx, fa = results[a]
        fb = results[b][1]
        row = {"coarse": a, "fine": b}
        for k in fields:
            d = fa[k] - restrict(fb[k], b // a)
            row[k] = float(np.sqrt(dx * np.sum(d * d)))
        rows.append(row)
    return rows


def differences(a, b, fields=("rho", "u", "p", "T", "j", "q")):
    if len(a["x"]) != len(b["x"]) or not np.allclose(a["x"], b["x"], rtol=0, atol=1e-12 * np.ptp(a["x"]) + 1e-300):
        raise UsageError("runs use different grids")
    rep = {}
    for k in fields:
        d = b[k] - a[k]
        na = np.linalg.norm(a[k])
        rep[k] = {
            "l2_rel": float(np.linalg.norm(d) / na) if na > 0 else float(np.linalg.norm(d)),
            "linf_rel": float(np.max(np.abs(d)) / np.max(np.abs(a[k]))) if np.any(a[k]) else float(np.max(np.abs(d))),
        }
    return rep


def compare_paths(a, b):
    a, b = Path(a), Path(b)
    if a.is_dir() != b.is_dir():
        raise UsageError("compare a directory with a directory or a file with a file")
    if a.is_file():
        return {a.name: differences(read_csv(a), read_csv(b))}
    fa = sorted(p.name for p in a.glob("t_*.csv"))
    fb = sorted(p.name for p in b.glob("t_*.csv"))
    if not fa or fa != fb:
        raise UsageError("runs have different snapshot times")
    return {n: differences(read_csv(a / n), read_csv(b / n)) for n in fa}


def cmd_run(args):
    overrides = _overrides(args)
    if args.convergence:
        ns = [int(s) for s in args.convergence.split(",") if s]
        results = {}
        for n in ns:
            for sc in config.load(args.config, args.case, overrides + [f"run.cells={n}"]):
                out = Path(args.out) / sc.name / f"cells_{n}" if args.out else None
                res, summary = run_scenario(sc, out)
                log.info("%s: %d cells, %d steps, %.1f s", sc.name, n, res.steps, res.wall_seconds)
                results[n] = (sc.grid.dx, res.snapshots[-1][1])
        table = convergence_table(results)
        text = json.dumps(table, indent=2)
        print(text)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "convergence.json").write_text(text + "\n")
        return 0
    for sc in config.load(args.config, args.case, overrides):
        out = Path(args.out) / sc.name if args.out else None
        res, summary = run_scenario(sc, out)
        print(json.dumps({k: summary[k] for k in ("scenario", "steps", "wall_seconds", "t_end")}))
    return 0


def cmd_compare(args):
    print(json.dumps(compare_paths(args.a, args.b), indent=2))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="gprphase", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("config")
    r.add_argument("--out")
    r.add_argument("--case", help="run a single case of a multi-case file")
    r.add_argument("--solver", choices=("hllp_mq", "hllp_m"))
    r.add_argument("--model", choices=("gpr", "euler_fourier"))
    r.add_argument("--integrator", choices=("semi_analytic", "explicit"))
    r.add_argument("--cells", type=int)
    r.add_argument("--cfl", type=float)
    r.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config entry")
    r.add_argument("--convergence", metavar="N1,N2,...", help="repeat across resolutions")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("compare", help="relative L2/Linf differences of two runs")
    c.add_argument("a")
    c.add_argument("b")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, config.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GprError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
