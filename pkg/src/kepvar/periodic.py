"""Periodic and quasi-periodic orbits built from one minimized segment.

The primary is extended over all time with rotation angle psi (each
collision-to-collision arch rotates by e^{-i psi}).  A matching particle
orbit follows from a single constrained solve:

1. minimize on [0, T] between the rays of angle psi/2 (at the collision,
   t = 0) and angle 0 (at the apoapsis, t = T);
2. mirror by conjugation onto [T, 2T]:  z(2T - t) = conj(z(t));
3. extend by rotation:  z(2kT + s) = z(s) * e^{-i k psi}.

The mirror step is a symmetry of the problem, so smoothness at the
junctions is a *verdict* about the segment solve (it holds exactly when
the endpoint velocities are orthogonal to their rays), not something the
construction enforces.  When psi is a rational multiple of pi the orbit
closes after ``closure_k`` arches; otherwise it is quasi-periodic and
fills an annulus.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .action import DiscretePath, Ray, TimeGrid, discrete_action, endpoint_derivative
from .errors import DomainError
from .kepler import extended_orbit
from .minimizer import MeshSpec, ProblemConfig, SolveReport, SolverSpec, solve
from .potential import FieldParams

_RATIONAL_TOL = 1e-9
_MAX_DENOMINATOR = 1000


def closure_count(psi):
    """Minimal k >= 1 with k * psi an integer multiple of 2*pi, else None.

    Detects rational psi / pi within 1e-9 for denominators up to 1000;
    anything else (the quasi-periodic case) returns None.  The cap keeps
    continued-fraction convergents of generic irrationals from slipping
    under the tolerance: a false positive would need an approximation
    error below 1e-9 at denominator <= 1000, far better than the ~1/q**2
    a typical irrational admits.
    """
    if psi == 0.0:
        return 1
    ratio = Fraction(psi / math.pi).limit_denominator(_MAX_DENOMINATOR)
    if abs(float(ratio) - psi / math.pi) > _RATIONAL_TOL:
        return None
    p, q = ratio.numerator, ratio.denominator
    # k * p / q in 2Z  <=>  k multiple of 2q / gcd(p, 2q)
    return 2 * q // math.gcd(abs(p), 2 * q)


@dataclass
class PeriodicSolution:
    """One mirrored segment on [0, 2T] plus its rotation extension rule."""

    psi: float
    half_period: float
    segment: DiscretePath
    report: SolveReport
    closure_k: int | None

    @property
    def period(self) -> float:
        return 2.0 * self.half_period

    def rotation(self, k) -> complex:
        return cmath.exp(-1j * k * self.psi)

    def sample_cycles(self, cycles):
        """Node times and samples over ``cycles`` arches of length 2T.

        Each arch k carries the segment samples times one rotation factor
        e^{-i k psi}; no other arithmetic touches the values.
        """
        if cycles < 1:
            raise DomainError("need at least one cycle")
        times = []
        values = []
        base_t = self.segment.grid.nodes
        base_z = self.segment.samples
        for k in range(cycles):
            rot = self.rotation(k)
            sl = slice(None) if k == cycles - 1 else slice(0, -1)
            times.append(base_t[sl] + k * self.period)
            values.append(base_z[sl] * rot)
        return np.concatenate(times), np.concatenate(values)

    def closure_error(self):
        """|z(2 k T) - z(0)| for the closing k (None when quasi-periodic)."""
        if self.closure_k is None:
            return None
        return abs(self.segment.samples[0] * self.rotation(self.closure_k) - self.segment.samples[0])


def _mirrored_segment(path, half_period):
    """Glue a path on [0, T] with its conjugate mirror on [T, 2T]."""
    nodes = path.grid.nodes
    mirror_nodes = (2.0 * half_period - nodes)[::-1]
    full_nodes = np.concatenate([nodes, mirror_nodes[1:]])
    mirror_samples = np.conj(path.samples)[::-1]
    full_samples = np.concatenate([path.samples, mirror_samples[1:]])
    grid = TimeGrid(full_nodes, path.grid.gamma, "left")
    left = path.left
    right = Ray(-path.left.angle) if isinstance(path.left, Ray) else path.left
    return DiscretePath(grid, full_samples, left, right)


def build_periodic(mu, m, half_period, psi, mesh=None, solver=None, init="auto"):
    """Minimize one arch and extend it to a (quasi-)periodic orbit.

    ``half_period`` is the collision-to-apoapsis time T of the primary;
    the segment problem runs on [0, T] from the ray of angle psi/2 to the
    ray of angle 0.  Non-convergence of the segment solve is propagated
    through the report, never raised.
    """
    if not -math.pi < psi < math.pi:
        raise DomainError(f"psi must lie in (-pi, pi), got {psi}")
    orbit = extended_orbit(mu, half_period, psi)
    config = ProblemConfig(
        params=FieldParams(mu, m, orbit),
        t_start=0.0,
        t_end=half_period,
        left=Ray(0.5 * psi),
        right=Ray(0.0),
        mesh=mesh if mesh is not None else MeshSpec(),
        solver=solver if solver is not None else SolverSpec(),
        init=init,
    )
    report = solve(config)
    segment = _mirrored_segment(report.path, half_period)
    return PeriodicSolution(psi, half_period, segment, report, closure_count(psi))


@dataclass(frozen=True)
class ClosureCheck:
    """Smoothness and closure diagnostics of a periodic solution."""

    closure_k: int | None
    closure_error: float | None
    mirror_action_gap: float
    junction_jump_mid: float
    junction_jump_end: float
    orthogonality_start: float
    orthogonality_mid: float


def _edge_velocity(times, values, side, width=3):
    ts = times[:width] if side == "left" else times[-width:]
    vs = values[:width] if side == "left" else values[-width:]
    return endpoint_derivative(ts, vs, side)


def closure_check(solution, params):
    """Verify the glue of a periodic solution.

    * mirror_action_gap: |action[0,T] - action[T,2T]| (conjugation is an
      exact symmetry of the field);
    * junction_jump_mid/end: one-sided velocity mismatch at t = T and
      across t = 2T (next arch rotated in);
    * orthogonality_start/mid: ray components of the endpoint velocities,
      |<v, e_ray>| / |v|, which are the smoothness conditions.
    """
    seg = solution.segment
    nodes = seg.grid.nodes
    z = seg.samples
    n_half = (nodes.size - 1) // 2
    t_half = nodes[: n_half + 1]
    t_rest = nodes[n_half:]

    half_left = DiscretePath(
        TimeGrid(t_half, seg.grid.gamma, "left"), z[: n_half + 1], seg.left, Ray(0.0)
    )
    half_right = DiscretePath(
        TimeGrid(t_rest, seg.grid.gamma, "right"), z[n_half:], Ray(0.0), seg.right
    )
    action_gap = abs(discrete_action(half_left, params) - discrete_action(half_right, params))

    v_mid_minus = _edge_velocity(t_half, z[: n_half + 1], "right")
    v_mid_plus = _edge_velocity(t_rest, z[n_half:], "left")
    jump_mid = abs(v_mid_plus - v_mid_minus)

    v_end = _edge_velocity(nodes, z, "right")
    v_start = _edge_velocity(nodes, z, "left")
    # the next arch starts as z(s) e^{-i psi}, so its initial velocity is rotated
    jump_end = abs(v_start * solution.rotation(1) - v_end)

    unit_start = Ray(0.5 * solution.psi).unit
    orth_start = abs((v_start * np.conj(unit_start)).real) / abs(v_start)
    orth_mid = abs(v_mid_minus.real) / abs(v_mid_minus)

    error = solution.closure_error()
    return ClosureCheck(
        closure_k=solution.closure_k,
        closure_error=None if error is None else float(error),
        mirror_action_gap=float(action_gap),
        junction_jump_mid=float(jump_mid),
        junction_jump_end=float(jump_end),
        orthogonality_start=float(orth_start),
        orthogonality_mid=float(orth_mid),
    )
