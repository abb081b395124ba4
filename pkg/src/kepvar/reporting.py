"""Deterministic artifact writers: trajectory CSV tables and JSON reports.

Identical inputs must produce byte-identical artifacts, so everything
here avoids timestamps, environment lookups and hash iteration order.
Floats are rendered with ``repr`` (shortest round-trip form); JSON
reports replace non-finite values with null to stay widely parseable.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .action import central_difference, endpoint_derivative, second_difference
from .potential import pair_force

CSV_COLUMNS = ("t", "re_z", "im_z", "r", "theta", "q_abs", "a_ratio", "J", "el_residual")


def _unwrapped_angle(samples):
    theta = np.full(samples.shape, np.nan)
    mask = np.abs(samples) > 0.0
    if mask.any():
        theta[mask] = np.unwrap(np.angle(samples[mask]))
    return theta


def _fd_velocity(times, samples):
    v = np.empty_like(samples)
    v[1:-1] = central_difference(times, samples)
    v[0] = endpoint_derivative(times, samples, "left")
    v[-1] = endpoint_derivative(times, samples, "right")
    return v


def trajectory_table(times, samples, params):
    """Column dict for the standard trajectory CSV.

    ``el_residual`` holds the magnitude of the Euler-Lagrange defect at
    interior nodes (NaN at the ends, where the stencil has no room).
    """
    times = np.asarray(times, dtype=float)
    z = np.asarray(samples, dtype=complex)
    r = np.abs(z)
    q = np.asarray(params.orbit.position(times), dtype=complex)
    q_abs = np.abs(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        a_ratio = np.where(q_abs > 0.0, r / q_abs, np.nan)
    v = _fd_velocity(times, z)
    j = (np.conj(z) * v).imag
    el = np.full(times.shape, np.nan)
    interior = slice(1, -1)
    accel = second_difference(times, z)
    force = pair_force(params.mu, params.m, z[interior], q[interior])
    el[interior] = np.abs(accel - force)
    return {
        "t": times,
        "re_z": z.real,
        "im_z": z.imag,
        "r": r,
        "theta": _unwrapped_angle(z),
        "q_abs": q_abs,
        "a_ratio": a_ratio,
        "J": j,
        "el_residual": el,
    }


def orbit_table(times, arc):
    """Trajectory table of a bare collision orbit (the orbit is ``z``)."""
    times = np.asarray(times, dtype=float)
    q = np.asarray(arc.position(times), dtype=complex)
    r = np.abs(q)
    el = np.full(times.shape, np.nan)
    interior = slice(1, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        own_force = -arc.mu * q[interior] / r[interior] ** 3
    el[interior] = np.abs(second_difference(times, q) - own_force)
    v = _fd_velocity(times, q)
    return {
        "t": times,
        "re_z": q.real,
        "im_z": q.imag,
        "r": r,
        "theta": _unwrapped_angle(q),
        "q_abs": r,
        "a_ratio": np.where(r > 0.0, 1.0, np.nan),
        "J": (np.conj(q) * v).imag,
        "el_residual": el,
    }


def write_csv(path, table):
    """Write the standard CSV; values rendered via ``repr`` round-trip."""
    columns = [np.asarray(table[name]) for name in CSV_COLUMNS]
    lines = [",".join(CSV_COLUMNS)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(value)) for value in row))
    with open(path, "w", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def jsonable(value):
    """Recursively convert to JSON-safe types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return {"re": jsonable(value.real), "im": jsonable(value.imag)}
    return value


def write_report(path, report):
    """Pretty-printed JSON report (stable key order, no timestamps)."""
    with open(path, "w", newline="\n") as handle:
        json.dump(jsonable(report), handle, indent=2)
        handle.write("\n")


def report_from_solve(report):
    """Serializable summary of a ``SolveReport``."""
    return {
        "action": report.action,
        "grad_norm": report.grad_norm,
        "iterations": report.iterations,
        "converged": report.converged,
        "el_residual_max": report.el_residual_max,
        "min_dist_center": report.min_dist_center,
        "min_dist_primary": report.min_dist_primary,
        "theta_verdict": report.theta_verdict,
        "theta_limit": report.theta_limit,
        "transversality_left": report.transversality_left,
        "transversality_right": report.transversality_right,
        "regime_flags": list(report.regime_flags),
        "levels": [dict(entry) for entry in report.level_history],
    }
