"""Command line front end.

Subcommands:

* ``roots``    -- the three boundary-angle zeros of h for a mass ratio
* ``kepler``   -- sample a bare collision orbit to CSV
* ``solve``    -- minimize a run file's constrained path problem
* ``sundman``  -- forced-collision solve plus near-collision asymptotics
* ``periodic`` -- one-segment (quasi-)periodic construction
* ``sweep``    -- a grid of solve runs, optionally in parallel

Run files are JSON; every angle entered anywhere (run files or flags) is
in units of pi, so ``"ray": 0.5`` means the vertical ray.  Outputs land
in the configured output directory as ``<label>.csv`` and
``<label>.report.json``; identical run files produce byte-identical
artifacts.  Exit codes: 0 success, 1 solver non-convergence (artifacts
still written), 2 malformed input.
"""

from __future__ import annotations

import argparse
import copy
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .action import FixedPoint, Origin, Ray, build_grid
from .analysis import fit_power_law, ratio_limits
from .errors import DomainError, MeshTooCoarseError, NumericalFailure, SingularityError
from .kepler import KeplerArc, arc_from_apoapsis, arc_from_boundary, extended_orbit
from .minimizer import MeshSpec, ProblemConfig, SolverSpec, solve
from .periodic import build_periodic, closure_check
from .potential import FieldParams
from .reporting import (
    orbit_table,
    report_from_solve,
    trajectory_table,
    write_csv,
    write_report,
)
from .roots import coercivity_constant, find_alphas

_USER_ERRORS = (DomainError, NumericalFailure, SingularityError, MeshTooCoarseError)


def _load_run(path):
    try:
        with open(path) as handle:
            run = json.load(handle)
    except FileNotFoundError:
        raise DomainError(f"run file not found: {path}")
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(run, dict):
        raise DomainError(f"{path}: run file must hold a JSON object")
    return run


def _bc_from_spec(spec, side):
    if spec == "origin":
        return Origin()
    if isinstance(spec, dict) and "ray" in spec:
        return Ray(float(spec["ray"]) * math.pi)
    if isinstance(spec, dict) and "point" in spec:
        re, im = spec["point"]
        return FixedPoint(complex(float(re), float(im)))
    raise DomainError(f"{side} boundary must be 'origin', {{'ray': angle/pi}} "
                      f"or {{'point': [re, im]}}, got {spec!r}")


def _arc_from_run(run):
    mu = float(run.get("mu", 1.0))
    spec = run.get("arc", {"kind": "energy", "energy": 0.0})
    if not isinstance(spec, dict):
        raise DomainError(f"'arc' must be an object, got {spec!r}")
    kind = spec.get("kind")
    try:
        if kind == "apoapsis":
            arc, t_fall = arc_from_apoapsis(mu, float(spec["radius"]))
        elif kind == "boundary":
            arc, t_fall = arc_from_boundary(
                mu, float(spec["radius"]), float(spec["radial_velocity"])
            )
        elif kind == "energy":
            arc = KeplerArc(mu, float(spec["energy"]))
            t_fall = None
        else:
            raise DomainError(f"unknown arc kind {spec.get('kind')!r}")
    except KeyError as exc:
        raise DomainError(f"arc kind {kind!r} needs a {exc.args[0]!r} entry")
    if "t_fall" in run:
        t_fall = float(run["t_fall"])
    if t_fall is None:
        raise DomainError("an energy-class arc needs an explicit 't_fall'")
    return arc, t_fall


def _window_from_run(run, t_fall):
    window = run.get("window", "fall")
    if window == "fall":
        return -t_fall, 0.0
    if window == "rise":
        return 0.0, t_fall
    try:
        t_start, t_end = (float(v) for v in window)
    except (TypeError, ValueError):
        raise DomainError(f"'window' must be 'fall', 'rise' or [t_start, t_end], got {window!r}")
    return t_start, t_end


def _mesh_from_run(run):
    spec = dict(run.get("mesh", {}))
    return MeshSpec(
        n=int(spec.get("n", 128)),
        gamma=float(spec.get("gamma", 1.5)),
        levels=int(spec.get("levels", 1)),
        factor=int(spec.get("factor", 4)),
    )


def _solver_from_run(run):
    spec = dict(run.get("solver", {}))
    kwargs = {}
    for key in ("grad_tol", "armijo", "shrink"):
        if key in spec:
            kwargs[key] = float(spec[key])
    for key in ("max_iter", "memory", "max_backtracks"):
        if key in spec:
            kwargs[key] = int(spec[key])
    return SolverSpec(**kwargs)


def _resolve_solve(run):
    """Run dict -> (ProblemConfig, metadata) for solve-like commands."""
    arc, t_fall = _arc_from_run(run)
    t_start, t_end = _window_from_run(run, t_fall)
    mu = arc.mu
    m = float(run.get("m", 1.0))
    left = _bc_from_spec(run.get("left", {"ray": 0.5}), "left")
    right = _bc_from_spec(run.get("right", "origin"), "right")
    config = ProblemConfig(
        params=FieldParams(mu, m, arc),
        t_start=t_start,
        t_end=t_end,
        left=left,
        right=right,
        mesh=_mesh_from_run(run),
        solver=_solver_from_run(run),
        init=run.get("init", "auto"),
    )
    meta = {
        "arc": arc,
        "label": str(run.get("label", "run")),
        "t_fall": t_fall,
        "echo": {
            "run": run,
            "mu": mu,
            "m": m,
            "energy": arc.energy,
            "t_start": t_start,
            "t_end": t_end,
        },
    }
    return config, meta


def _coercivity_or_none(config):
    left, right = config.left, config.right
    if not (isinstance(left, Ray) and isinstance(right, Ray)):
        return None
    try:
        angles = sorted(abs(math.atan2(math.sin(b.angle), math.cos(b.angle)))
                        for b in (left, right))
        return coercivity_constant(angles[1], angles[0])
    except DomainError:
        return None


def _emit_solve_artifacts(report, config, meta, out_dir, command, analysis=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    label = meta["label"]
    csv_path = out_dir / f"{label}.csv"
    table = trajectory_table(report.path.grid.nodes, report.path.samples, config.params)
    write_csv(csv_path, table)
    doc = {
        "command": command,
        "label": label,
        "config": meta["echo"],
        "coercivity": _coercivity_or_none(config),
        "result": report_from_solve(report),
    }
    if analysis is not None:
        doc["analysis"] = analysis
    report_path = out_dir / f"{label}.report.json"
    write_report(report_path, doc)
    return csv_path, report_path


def _cmd_roots(args):
    triple = find_alphas(args.mass_ratio)
    res = triple.residuals
    print(f"mass_ratio: {args.mass_ratio!r}")
    for name, value, residual in (
        ("alpha1", triple.alpha1, res[0]),
        ("alpha2", triple.alpha2, res[1]),
        ("alpha3", triple.alpha3, res[2]),
    ):
        print(f"{name}: {value!r}  (residual {residual:.3e})")
    if args.out:
        write_report(
            args.out,
            {
                "command": "roots",
                "mass_ratio": args.mass_ratio,
                "alpha1": triple.alpha1,
                "alpha2": triple.alpha2,
                "alpha3": triple.alpha3,
                "residuals": list(res),
            },
        )
    return 0


def _cmd_kepler(args):
    if args.apoapsis is not None:
        arc, t_fall = arc_from_apoapsis(args.mu, args.apoapsis)
    elif args.boundary is not None:
        arc, t_fall = arc_from_boundary(args.mu, args.boundary[0], args.boundary[1])
    else:
        arc, t_fall = KeplerArc(args.mu, args.energy), None
    t_start = args.t_start if args.t_start is not None else (-t_fall if t_fall else -1.0)
    t_end = args.t_end if args.t_end is not None else 0.0
    grid = build_grid(t_start, t_end, args.n, args.gamma)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, orbit_table(grid.nodes, arc))
    print(f"kepler: energy={arc.energy!r} samples={args.n + 1} -> {out}")
    return 0


def _cmd_solve(args):
    run = _load_run(args.run)
    config, meta = _resolve_solve(run)
    report = solve(config)
    out_dir = args.out_dir or run.get("out_dir", ".")
    csv_path, report_path = _emit_solve_artifacts(report, config, meta, out_dir, "solve")
    print(
        f"solve {meta['label']}: action={report.action!r} converged={report.converged} "
        f"-> {csv_path}, {report_path}"
    )
    return 0 if report.converged else 1


def _sundman_analysis(report, meta, run):
    nodes = report.path.grid.nodes
    radii = np.abs(report.path.samples)
    s = np.abs(nodes[nodes != 0.0])
    t_min = float(s.min())
    window = run.get("fit_window")
    window = (float(window[0]), float(window[1])) if window else (10.0 * t_min, 100.0 * t_min)
    fit = fit_power_law(nodes, radii, window)
    ratios = ratio_limits(report.path, meta["arc"])
    mass_ratio = float(run.get("m", 1.0)) / meta["arc"].mu
    triple = find_alphas(mass_ratio)
    return {
        "fit": {
            "exponent": fit.exponent,
            "prefactor": fit.prefactor,
            "rms_residual": fit.rms_residual,
            "n_samples": fit.n_samples,
            "window": list(fit.window),
        },
        "ratios": {
            "a_limit": ratios.a_limit,
            "a_spread": ratios.a_spread,
            "b_limit": ratios.b_limit,
            "b_spread": ratios.b_spread,
            "c_limit": ratios.c_limit,
            "c_spread": ratios.c_spread,
        },
        "theta_limit": report.theta_limit,
        "alphas": {
            "alpha1": triple.alpha1,
            "alpha2": triple.alpha2,
            "alpha3": triple.alpha3,
        },
    }


def _cmd_sundman(args):
    run = _load_run(args.run)
    run.setdefault("right", "origin")
    config, meta = _resolve_solve(run)
    if not isinstance(config.right if config.t_end == 0.0 else config.left, Origin):
        raise DomainError("sundman runs must pin the collision-end boundary to 'origin'")
    report = solve(config)
    analysis = _sundman_analysis(report, meta, run)
    out_dir = args.out_dir or run.get("out_dir", ".")
    csv_path, report_path = _emit_solve_artifacts(
        report, config, meta, out_dir, "sundman", analysis
    )
    fit = analysis["fit"]
    print(
        f"sundman {meta['label']}: exponent={fit['exponent']!r} "
        f"a_limit={analysis['ratios']['a_limit']!r} converged={report.converged} "
        f"-> {csv_path}, {report_path}"
    )
    return 0 if report.converged else 1


def _cmd_periodic(args):
    run = _load_run(args.run)
    mu = float(run.get("mu", 1.0))
    m = float(run.get("m", 1.0))
    try:
        t_half = float(run["t_half"])
        psi = float(run["psi"]) * math.pi
    except KeyError as exc:
        raise DomainError(f"periodic run files need a {exc.args[0]!r} entry")
    label = str(run.get("label", "periodic"))
    solution = build_periodic(
        mu,
        m,
        t_half,
        psi,
        mesh=_mesh_from_run(run),
        solver=_solver_from_run(run),
        init=run.get("init", "auto"),
    )
    params = FieldParams(mu, m, extended_orbit(mu, t_half, psi))
    check = closure_check(solution, params)
    cycles = int(run.get("cycles", solution.closure_k or 1))
    times, values = solution.sample_cycles(cycles)
    out_dir = Path(args.out_dir or run.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{label}.csv"
    write_csv(csv_path, trajectory_table(times, values, params))
    doc = {
        "command": "periodic",
        "label": label,
        "config": {"run": run, "psi": psi, "t_half": t_half, "cycles": cycles},
        "segment": report_from_solve(solution.report),
        "closure": {
            "closure_k": check.closure_k,
            "closure_error": check.closure_error,
            "mirror_action_gap": check.mirror_action_gap,
            "junction_jump_mid": check.junction_jump_mid,
            "junction_jump_end": check.junction_jump_end,
            "orthogonality_start": check.orthogonality_start,
            "orthogonality_mid": check.orthogonality_mid,
        },
    }
    report_path = out_dir / f"{label}.report.json"
    write_report(report_path, doc)
    print(
        f"periodic {label}: closure_k={check.closure_k} "
        f"closure_error={check.closure_error!r} converged={solution.report.converged} "
        f"-> {csv_path}, {report_path}"
    )
    return 0 if solution.report.converged else 1


def _set_nested(target, dotted, value):
    keys = dotted.split(".")
    node = target
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise DomainError(f"sweep key {dotted!r} does not address a mapping")
    node[keys[-1]] = value


def solve_cell(cell):
    """One sweep cell: run a solve and return its index entry (picklable)."""
    run, out_dir = cell
    config, meta = _resolve_solve(run)
    report = solve(config)
    csv_path, report_path = _emit_solve_artifacts(report, config, meta, out_dir, "solve")
    return {
        "label": meta["label"],
        "overrides": run.get("_overrides", {}),
        "action": report.action,
        "converged": report.converged,
        "theta_verdict": report.theta_verdict,
        "csv": csv_path.name,
        "report": report_path.name,
    }


def _cmd_sweep(args):
    run = _load_run(args.run)
    base = run.get("base")
    grid = run.get("grid")
    if not isinstance(base, dict) or not isinstance(grid, dict) or not grid:
        raise DomainError("sweep run files need 'base' (object) and 'grid' (object)")
    label = str(run.get("label", "sweep"))
    out_dir = Path(args.out_dir or run.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    keys = list(grid.keys())
    cells = []
    for index, combo in enumerate(itertools.product(*(grid[k] for k in keys))):
        cell_run = copy.deepcopy(base)
        overrides = dict(zip(keys, combo))
        for dotted, value in overrides.items():
            _set_nested(cell_run, dotted, value)
        cell_run["label"] = f"{label}-{index:04d}"
        cell_run["_overrides"] = overrides
        cells.append((cell_run, str(out_dir)))
    workers = int(os.environ.get("KEPVAR_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(solve_cell, cells))
    else:
        entries = [solve_cell(cell) for cell in cells]
    index_path = out_dir / f"{label}.index.json"
    write_report(index_path, {"command": "sweep", "label": label, "cells": entries})
    all_converged = all(entry["converged"] for entry in entries)
    print(f"sweep {label}: {len(entries)} cells, all_converged={all_converged} -> {index_path}")
    return 0 if all_converged else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kepvar",
        description="Variational solver around a fixed center and a collision Kepler primary",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_roots = sub.add_parser("roots", help="boundary-angle zeros of h")
    p_roots.add_argument("--mass-ratio", type=float, required=True)
    p_roots.add_argument("--out", type=str, default=None)
    p_roots.set_defaults(handler=_cmd_roots)

    p_kep = sub.add_parser("kepler", help="sample a collision orbit to CSV")
    p_kep.add_argument("--mu", type=float, default=1.0)
    group = p_kep.add_mutually_exclusive_group()
    group.add_argument("--energy", type=float, default=0.0)
    group.add_argument("--apoapsis", type=float, default=None)
    group.add_argument("--boundary", type=float, nargs=2, default=None,
                       metavar=("RADIUS", "RADIAL_VELOCITY"))
    p_kep.add_argument("--t-start", type=float, default=None)
    p_kep.add_argument("--t-end", type=float, default=None)
    p_kep.add_argument("--n", type=int, default=256)
    p_kep.add_argument("--gamma", type=float, default=1.0)
    p_kep.add_argument("--out", type=str, required=True)
    p_kep.set_defaults(handler=_cmd_kepler)

    for name, handler in (
        ("solve", _cmd_solve),
        ("sundman", _cmd_sundman),
        ("periodic", _cmd_periodic),
        ("sweep", _cmd_sweep),
    ):
        p = sub.add_parser(name)
        p.add_argument("--run", type=str, required=True, help="JSON run file")
        p.add_argument("--out-dir", type=str, default=None)
        p.set_defaults(handler=handler)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
