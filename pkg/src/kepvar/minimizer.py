"""Direct minimization of the discrete action over constrained paths.

The solver walks the free coordinates of a ``DiscretePath`` (interior
samples plus Ray endpoint radii) with a limited-memory quasi-Newton
iteration.  Design points:

* the inverse-Hessian seed is a fixed diagonal built from the kinetic
  tridiagonal of the grid plus the field curvature of the starting path,
  which keeps the step count nearly mesh-independent;
* the backtracking line search accepts only strict decrease, so the
  action history is strictly monotone by construction; steps whose trial
  path lands on a body evaluate to an infinite action and are halved,
  never patched;
* Ray radii live in the half-line [0, inf); steps are clamped and
  convergence is measured with the projected gradient sup-norm;
* hitting the iteration cap is reported (``converged = False``), not
  raised -- a non-convergent run is data.

Mirror symmetry: the field is invariant under complex conjugation, so a
configuration with negated boundary angles produces the conjugate path.
The collinear classes (boundary angles 0 or pi) are preserved exactly:
axis-direction units are exact, and every gradient of an axis-bound path
stays on the axis bit-for-bit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .action import (
    DiscretePath,
    FixedPoint,
    Origin,
    Ray,
    TimeGrid,
    action_core,
    build_grid,
    el_residual,
    endpoint_derivative,
    free_coordinates,
    gradient_core,
    pack_gradient,
    with_free_coordinates,
)
from .analysis import (
    angular_momentum,
    collision_scan,
    innermost_decade_mean,
    limit_angle_estimate,
    theta_profile,
)
from .errors import DomainError, MeshTooCoarseError, SingularityError
from .potential import FieldParams
from .roots import find_alphas


@dataclass(frozen=True)
class MeshSpec:
    """Mesh continuation schedule: n, n*factor, ..., over ``levels`` levels."""

    n: int = 128
    gamma: float = 1.5
    levels: int = 1
    factor: int = 4


@dataclass(frozen=True)
class SolverSpec:
    """Tolerances for one descent.

    ``grad_tol`` bounds the projected-gradient sup-norm.  Strict-decrease
    line searches stall at a mesh-dependent floor near sqrt(ulp(action) /
    min spacing), so very fine meshes need a looser tolerance than coarse
    ones; 1e-6 is reachable up to a few thousand segments.
    """

    grad_tol: float = 1e-6
    max_iter: int = 30000
    memory: int = 10
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60


@dataclass
class ProblemConfig:
    """A constrained minimization problem for one time window.

    The window must touch the primary's collision: 0 is one of its
    endpoints.  ``init`` is "auto" (radius follows the primary, angles
    interpolate linearly), "inner"/"outer" (collinear classes on the
    theta = pi ray, inside/outside the primary), or a ``DiscretePath``
    to warm-start from.
    """

    params: FieldParams
    t_start: float
    t_end: float
    left: FixedPoint | Ray | Origin
    right: FixedPoint | Ray | Origin
    mesh: MeshSpec = field(default_factory=MeshSpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    init: object = "auto"


@dataclass
class SolveReport:
    """Outcome of one minimization, including mesh-quality diagnostics."""

    path: DiscretePath
    action: float
    grad_norm: float
    iterations: int
    converged: bool
    el_residual_max: float
    min_dist_center: float
    min_dist_primary: float
    theta_verdict: str
    theta_limit: float | None
    theta_series: np.ndarray
    a_series: np.ndarray
    j_series: np.ndarray
    transversality_left: float | None
    transversality_right: float | None
    regime_flags: tuple
    action_history: np.ndarray
    level_history: list


def _normalize_angle(a):
    return math.atan2(math.sin(a), math.cos(a))


def regime_flags(config):
    """Check the hypotheses behind the structural guarantees, as warnings.

    Runs outside the guaranteed regime are still solved; the flags only
    mark that the monotonicity/unimodality properties may not hold.
    """
    flags = []
    collision_end_right = config.t_end == 0.0
    bc_collision = config.right if collision_end_right else config.left
    bc_far = config.left if collision_end_right else config.right
    if isinstance(bc_collision, Ray) and isinstance(bc_far, Ray):
        a0 = _normalize_angle(bc_collision.angle)
        a1 = _normalize_angle(bc_far.angle)
        if abs(a0) > 0.5 * math.pi + 1e-12:
            flags.append("collision_end_angle_beyond_half_plane")
        if a0 == a1:
            flags.append("equal_boundary_angles")
        if math.sin(a0) * math.sin(a1) < 0.0:
            flags.append("angles_straddle_real_axis")
    return tuple(flags)


def _auto_init(grid, config):
    """Starting path: radius profile plus linear angle interpolation."""
    params = config.params
    nodes = grid.nodes
    style = config.init if isinstance(config.init, str) else "auto"
    far_index = 0 if abs(nodes[0]) >= abs(nodes[-1]) else -1
    far_bc = config.left if far_index == 0 else config.right
    near_bc = config.right if far_index == 0 else config.left

    def bc_radius_angle(bc, t):
        if isinstance(bc, Ray):
            return float(np.abs(params.orbit.position(nodes[far_index]))), bc.angle
        if isinstance(bc, FixedPoint):
            return abs(bc.point), float(np.angle(bc.point)) if bc.point != 0 else 0.0
        return 0.0, None

    r_far, ang_far = bc_radius_angle(far_bc, nodes[far_index])
    r_near, ang_near = bc_radius_angle(near_bc, nodes[-1 - far_index])

    if isinstance(near_bc, Origin) or isinstance(far_bc, Origin) or style in ("inner", "outer"):
        # follow the primary's own profile into the collision
        q_abs = np.abs(params.orbit.position(nodes))
        anchor = q_abs[far_index]
        if anchor == 0.0:
            raise DomainError("primary sits at the origin at the anchor endpoint")
        scale = {"inner": 0.5, "outer": 2.0}.get(style, (r_far or anchor) / anchor)
        radii = scale * q_abs
        if style in ("inner", "outer"):
            angles = np.full(nodes.shape, math.pi)
        else:
            a_lo = ang_far if ang_far is not None else 0.0
            a_hi = ang_near if ang_near is not None else 0.0
            if far_index == 0:
                angles = np.interp(nodes, [nodes[0], nodes[-1]], [a_lo, a_hi])
            else:
                angles = np.interp(nodes, [nodes[0], nodes[-1]], [a_hi, a_lo])
    else:
        ang_far = 0.0 if ang_far is None else ang_far
        ang_near = 0.0 if ang_near is None else ang_near
        if far_index == 0:
            radii = np.interp(nodes, [nodes[0], nodes[-1]], [r_far, r_near])
            angles = np.interp(nodes, [nodes[0], nodes[-1]], [ang_far, ang_near])
        else:
            radii = np.interp(nodes, [nodes[0], nodes[-1]], [r_near, r_far])
            angles = np.interp(nodes, [nodes[0], nodes[-1]], [ang_near, ang_far])

    if np.all(angles == math.pi):
        samples = radii * (-1.0 + 0.0j)
    elif np.all(angles == 0.0):
        samples = radii * (1.0 + 0.0j)
    else:
        samples = radii * np.exp(1j * angles)
    return DiscretePath(grid, samples, config.left, config.right)


def interpolate_path(path, grid):
    """Resample a path onto a new grid of the same time window."""
    if not (grid.t_start == path.grid.t_start and grid.t_end == path.grid.t_end):
        raise DomainError("refinement grid must span the same window")
    re = np.interp(grid.nodes, path.grid.nodes, path.samples.real)
    im = np.interp(grid.nodes, path.grid.nodes, path.samples.imag)
    return DiscretePath(grid, re + 1j * im, path.left, path.right)


def mirror_path(path, about=0.0):
    """Time-reflect a path around ``about`` and conjugate it.

    The field is conjugation-invariant and the primary is symmetric about
    its collisions and apoapses, so mirrors of stationary paths are
    stationary for matching windows.
    """

    def mirror_bc(bc):
        if isinstance(bc, Ray):
            return Ray(-bc.angle)
        if isinstance(bc, FixedPoint):
            return FixedPoint(bc.point.conjugate())
        return bc

    times = (2.0 * about - path.grid.nodes)[::-1].copy()
    grid = TimeGrid(
        times,
        path.grid.gamma,
        {"left": "right", "right": "left"}.get(path.grid.singular_end, path.grid.singular_end),
    )
    samples = np.conj(path.samples)[::-1].copy()
    return DiscretePath(grid, samples, mirror_bc(path.right), mirror_bc(path.left))


def _radius_slots(path):
    """Indices of packed coordinates that carry Ray radii (bounded >= 0)."""
    slots = []
    if isinstance(path.left, Ray):
        slots.append(0)
    if isinstance(path.right, Ray):
        slots.append(2 * (path.grid.n_segments - 1) + len(slots))
    return np.asarray(slots, dtype=int)


def _preconditioner(path, params):
    """Diagonal Hessian scale per free coordinate (kinetic + curvature)."""
    dt = path.grid.spacings
    nodes = path.grid.nodes
    z = path.samples
    q = params.orbit.position(nodes)
    with np.errstate(divide="ignore"):
        curv = 2.0 * params.mu / np.abs(z) ** 3 + 2.0 * params.m / np.abs(z - q) ** 3
    curv = np.where(np.isfinite(curv), curv, 0.0)
    interior = 1.0 / dt[:-1] + 1.0 / dt[1:] + 0.5 * (dt[:-1] + dt[1:]) * curv[1:-1]
    parts = []
    if isinstance(path.left, Ray):
        parts.append([1.0 / dt[0] + 0.5 * dt[0] * curv[0]])
    parts.append(np.repeat(interior, 2))
    if isinstance(path.right, Ray):
        parts.append([1.0 / dt[-1] + 0.5 * dt[-1] * curv[-1]])
    diag = np.concatenate([np.asarray(p, dtype=float) for p in parts])
    return 1.0 / diag


def _descend(path, config):
    """Quasi-Newton descent on one grid.  Returns (path, stats dict)."""
    params = config.params
    spec = config.solver
    nodes = path.grid.nodes
    q_mid = params.orbit.position(path.grid.midtimes)
    mu, m = params.mu, params.m
    template = path
    slots = _radius_slots(path)

    def evaluate(x):
        trial = with_free_coordinates(template, x)
        try:
            f = action_core(trial.samples, nodes, mu, m, q_mid)
        except SingularityError:
            return np.inf, None, trial
        g = pack_gradient(trial, gradient_core(trial.samples, nodes, mu, m, q_mid))
        return f, g, trial

    def projected(g, x):
        pg = g.copy()
        if slots.size:
            at_bound = x[slots] <= 0.0
            blocked = slots[at_bound & (g[slots] > 0.0)]
            pg[blocked] = 0.0
        return pg

    x = free_coordinates(path)
    f, g, current = evaluate(x)
    if not np.isfinite(f):
        raise DomainError("initial path evaluates to an infinite action")

    dinv = _preconditioner(path, params)
    memory = deque(maxlen=spec.memory)
    gamma = 1.0
    history = [f]
    converged = False
    iterations = 0

    for iterations in range(1, spec.max_iter + 1):
        pg = projected(g, x)
        grad_norm = float(np.max(np.abs(pg))) if pg.size else 0.0
        if grad_norm <= spec.grad_tol:
            converged = True
            iterations -= 1
            break

        # two-loop recursion seeded with the diagonal
        d = g.copy()
        alphas = []
        for s, y, rho in reversed(memory):
            a = rho * float(np.dot(s, d))
            d -= a * y
            alphas.append(a)
        d *= gamma * dinv
        for (s, y, rho), a in zip(memory, reversed(alphas)):
            b = rho * float(np.dot(y, d))
            d += (a - b) * s
        d = -d
        slope = float(np.dot(g, d))
        if not slope < 0.0:
            memory.clear()
            gamma = 1.0
            d = -dinv * g
            slope = float(np.dot(g, d))
            if not slope < 0.0:
                break

        step = 1.0
        accepted = False
        for _ in range(spec.max_backtracks):
            x_new = x + step * d
            if slots.size:
                x_new[slots] = np.maximum(x_new[slots], 0.0)
            f_new, g_new, trial = evaluate(x_new)
            move = float(np.dot(g, x_new - x))
            if np.isfinite(f_new) and move < 0.0 and f_new <= f + spec.armijo * move and f_new < f:
                accepted = True
                break
            step *= spec.shrink
        if not accepted:
            break

        assert f_new < f  # strict decrease on every accepted step
        s_vec = x_new - x
        y_vec = g_new - g
        sy = float(np.dot(s_vec, y_vec))
        if sy > 1e-12 * float(np.linalg.norm(s_vec)) * float(np.linalg.norm(y_vec)):
            memory.append((s_vec, y_vec, 1.0 / sy))
            yy = float(np.dot(y_vec, dinv * y_vec))
            if yy > 0.0:
                gamma = sy / yy
        x, f, g, current = x_new, f_new, g_new, trial
        history.append(f)
    else:
        iterations = spec.max_iter

    pg = projected(g, x)
    stats = {
        "action": float(f),
        "grad_norm": float(np.max(np.abs(pg))) if pg.size else 0.0,
        "iterations": iterations,
        "converged": bool(converged or (float(np.max(np.abs(pg))) <= spec.grad_tol if pg.size else True)),
        "history": np.asarray(history),
    }
    return current, stats


def _transversality(path, side):
    bc = path.left if side == "left" else path.right
    if not isinstance(bc, Ray):
        return None
    v = endpoint_derivative(path.grid.nodes, path.samples, side)
    speed = abs(v)
    if speed == 0.0:
        return math.inf
    return abs((v * bc.unit.conjugate()).real) / speed


def _theta_limit(profile, params):
    """Extrapolated collision angle for forced-collision solves.

    The alpha2 branch (angle -> 0, path opposite the primary) supplies
    the decay exponents; profiles sitting nearer the theta = pi branch
    fall back to the innermost-decade mean, which that branch approaches
    fast enough for a plain average.
    """
    mean = innermost_decade_mean(profile.times, profile.theta)[0]
    if abs(mean) > 0.5 * math.pi:
        return mean
    alpha2 = find_alphas(params.mass_ratio).alpha2
    fit = limit_angle_estimate(profile.times, profile.theta, params.mass_ratio, alpha2)
    return fit.limit


def _diagnostic_series(path, params):
    samples = path.samples
    radii = np.abs(samples)
    q_abs = np.abs(params.orbit.radius(path.grid.nodes))
    with np.errstate(divide="ignore", invalid="ignore"):
        a_series = np.where(q_abs > 0.0, radii / q_abs, np.nan)
    theta_series = np.where(radii > 0.0, np.angle(samples), np.nan)
    return theta_series, a_series, angular_momentum(path)


def _build_report(path, config, stats, level_history):
    params = config.params
    residual = el_residual(path, params)
    scan = collision_scan(path, params)
    theta_series, a_series, j_series = _diagnostic_series(path, params)
    try:
        profile = theta_profile(path)
        verdict = profile.verdict
    except (DomainError, MeshTooCoarseError):
        profile = None
        verdict = "unresolved"
    theta_limit = None
    collision_pinned = isinstance(
        config.right if config.t_end == 0.0 else config.left, Origin
    )
    if profile is not None and collision_pinned:
        try:
            theta_limit = _theta_limit(profile, params)
        except (DomainError, MeshTooCoarseError):
            theta_limit = None
    return SolveReport(
        path=path,
        action=stats["action"],
        grad_norm=stats["grad_norm"],
        iterations=stats["iterations"],
        converged=stats["converged"],
        el_residual_max=float(np.max(np.abs(residual))),
        min_dist_center=scan.min_dist_center,
        min_dist_primary=scan.min_dist_primary,
        theta_verdict=verdict,
        theta_limit=theta_limit,
        theta_series=theta_series,
        a_series=a_series,
        j_series=j_series,
        transversality_left=_transversality(path, "left"),
        transversality_right=_transversality(path, "right"),
        regime_flags=regime_flags(config),
        action_history=stats["history"],
        level_history=level_history,
    )


def _level_entry(n, stats, path, params):
    return {
        "n": n,
        "action": stats["action"],
        "grad_norm": stats["grad_norm"],
        "iterations": stats["iterations"],
        "converged": stats["converged"],
        "el_residual_max": float(np.max(np.abs(el_residual(path, params)))),
    }


def _validate(config):
    if not config.t_start < config.t_end:
        raise DomainError("need t_start < t_end")
    if 0.0 not in (config.t_start, config.t_end):
        raise DomainError("the window must touch the primary's collision at t = 0")
    if isinstance(config.init, str) and config.init not in ("auto", "inner", "outer"):
        raise DomainError(f"unknown init style {config.init!r}")


def minimize(config):
    """Minimize on the base mesh of the configuration.

    Returns a ``SolveReport``; an iteration-capped run comes back with
    ``converged = False`` rather than raising.
    """
    _validate(config)
    grid = build_grid(config.t_start, config.t_end, config.mesh.n, config.mesh.gamma)
    if isinstance(config.init, DiscretePath):
        start = config.init
        if start.grid.nodes.size != grid.nodes.size or not np.array_equal(
            start.grid.nodes, grid.nodes
        ):
            start = interpolate_path(start, grid)
    else:
        start = _auto_init(grid, config)
    try:
        path, stats = _descend(start, config)
    except SingularityError as exc:
        raise DomainError(f"initialization touches a body: {exc}") from exc
    entry = _level_entry(config.mesh.n, stats, path, config.params)
    return _build_report(path, config, stats, [entry])


def refine_and_polish(report, config):
    """Continue a report through the remaining mesh levels of the config.

    Each level multiplies the segment count by ``mesh.factor``, resamples
    the incumbent path and re-minimizes from it.  The returned report's
    ``level_history`` shows the per-level residual decrease.
    """
    path = report.path
    history = list(report.level_history)
    stats = None
    for level in range(1, config.mesh.levels):
        n = config.mesh.n * config.mesh.factor**level
        grid = build_grid(config.t_start, config.t_end, n, config.mesh.gamma)
        path = interpolate_path(path, grid)
        path, stats = _descend(path, config)
        history.append(_level_entry(n, stats, path, config.params))
    if stats is None:
        return report
    return _build_report(path, config, stats, history)


def solve(config):
    """Minimize on the base mesh, then refine through all levels."""
    return refine_and_polish(minimize(config), config)
