"""Diagnostics for solved paths: asymptotic fits, angle profiles, ratios.

Everything here consumes sampled trajectories.  Derivatives of sampled
data reuse the same non-uniform stencils as the Euler-Lagrange residual
(``central_difference`` / ``second_difference``), so ratios of derived
quantities cancel their leading discretization error when numerator and
denominator follow the same power law.

Near-collision limits are estimated over the innermost resolved decade:
the samples with ``10 * t_min <= |t| <= 100 * t_min`` where t_min is the
smallest nonzero |t| on the grid.  The decade adjacent to the collision is
skipped deliberately; those nodes carry the largest stencil error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .action import central_difference, endpoint_derivative, second_difference
from .errors import DomainError, MeshTooCoarseError

FIT_MIN_SAMPLES = 8
FIT_MIN_SPAN = 1e3
ANGLE_JUMP_LIMIT = 0.5 * math.pi
_FLAT_TOL = 1e-10


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (log10 |t|, log10 value)."""

    exponent: float
    prefactor: float
    rms_residual: float
    n_samples: int
    window: tuple


def fit_power_law(times, values, window):
    """Fit value ~ prefactor * |t|**exponent over ``window`` = (lo, hi).

    Uses every sample with lo <= |t| <= hi and value > 0; raises
    ``DomainError`` when fewer than ``FIT_MIN_SAMPLES`` qualify.
    """
    lo, hi = window
    s = np.abs(np.asarray(times, dtype=float))
    v = np.asarray(values, dtype=float)
    mask = (s >= lo) & (s <= hi) & (v > 0.0) & (s > 0.0)
    n = int(mask.sum())
    if n < FIT_MIN_SAMPLES:
        raise DomainError(
            f"power-law window [{lo}, {hi}] holds {n} samples, "
            f"need at least {FIT_MIN_SAMPLES}"
        )
    log_t = np.log10(s[mask])
    log_v = np.log10(v[mask])
    slope, intercept = np.polyfit(log_t, log_v, 1)
    resid = log_v - (slope * log_t + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return PowerLawFit(float(slope), float(10.0**intercept), rms, n, (lo, hi))


def innermost_decade_mean(times, values, lo_factor=10.0, hi_factor=100.0):
    """Mean and half-spread of ``values`` over the innermost resolved decade."""
    s = np.abs(np.asarray(times, dtype=float))
    v = np.asarray(values, dtype=float)
    keep = (s > 0.0) & np.isfinite(v)
    if not keep.any():
        raise MeshTooCoarseError("no finite samples with |t| > 0")
    t_min = s[keep].min()
    mask = keep & (s >= lo_factor * t_min) & (s <= hi_factor * t_min)
    if int(mask.sum()) < 3:
        raise MeshTooCoarseError(
            f"innermost decade [{lo_factor * t_min:.3e}, {hi_factor * t_min:.3e}] "
            f"holds {int(mask.sum())} samples"
        )
    window = v[mask]
    return float(np.mean(window)), float(0.5 * (window.max() - window.min()))


def decay_exponents(mass_ratio, alpha):
    """Characteristic exponents of the angle's linearized collision approach.

    Perturbing theta about 0 along the homothetic background r =
    alpha * lambda * |t|**(2/3) (primary on the opposite ray) turns the
    angular momentum balance d/dt(r^2 theta') = torque into the Euler
    equation beta * (beta + 1/3) = (2/9) * mass_ratio / (alpha *
    (1 + alpha)**3) for modes theta ~ |t|**beta.  Returns (beta_plus,
    beta_minus); only the beta_plus > 0 mode stays bounded as t -> 0, so
    the angle of a bounded trajectory decays like |t|**beta_plus.
    """
    if mass_ratio < 0.0 or alpha <= 0.0:
        raise DomainError("decay_exponents needs mass_ratio >= 0 and alpha > 0")
    coupling = (2.0 / 9.0) * mass_ratio / (alpha * (1.0 + alpha) ** 3)
    disc = math.sqrt(1.0 / 9.0 + 4.0 * coupling)
    return ((-1.0 / 3.0 + disc) / 2.0, (-1.0 / 3.0 - disc) / 2.0)


@dataclass(frozen=True)
class LimitAngleFit:
    """Extrapolated collision-limit of the angle and its mode amplitudes."""

    limit: float
    coef_plus: float
    coef_minus: float
    rms_residual: float
    n_samples: int
    window: tuple
    exponents: tuple


def limit_angle_estimate(times, values, mass_ratio, alpha, window=None):
    """Extrapolate theta(t) to its t -> 0 limit near the theta = 0 branch.

    The angle approaches its limit like |t|**beta_plus with beta_plus
    typically well under 0.1, far too slow to read the limit off the
    innermost samples directly.  Instead the profile is least-squares
    fit in the four-mode basis {1, s**b+, s**(3 b+), s**b-} (s = |t|):
    the two characteristic modes of the linearized angular equation plus
    the first correction the cubic nonlinearity generates.  The constant
    term is the extrapolated limit.  The decaying s**b- mode soaks up the
    collision-end discretization boundary layer, which would otherwise
    bias the limit upward.

    The default window [10 t_min, min(3e4 t_min, 0.3 s_max)] skips the
    innermost decade (largest stencil error) and the outer region where
    the linearization degrades.  With beta_plus so small the basis
    columns only separate over several decades, so windows narrower than
    ``FIT_MIN_SPAN`` raise ``MeshTooCoarseError`` instead of returning a
    wildly extrapolated constant.
    """
    s = np.abs(np.asarray(times, dtype=float))
    v = np.asarray(values, dtype=float)
    keep = (s > 0.0) & np.isfinite(v)
    if not keep.any():
        raise MeshTooCoarseError("no finite samples with |t| > 0")
    t_min = s[keep].min()
    if window is None:
        window = (10.0 * t_min, min(3.0e4 * t_min, 0.3 * s[keep].max()))
    lo, hi = window
    if not hi >= FIT_MIN_SPAN * lo:
        raise MeshTooCoarseError(
            f"limit-angle window [{lo:.3e}, {hi:.3e}] spans less than "
            f"{FIT_MIN_SPAN:.0e}x; refine toward the collision"
        )
    mask = keep & (s >= lo) & (s <= hi)
    n = int(mask.sum())
    if n < FIT_MIN_SAMPLES:
        raise MeshTooCoarseError(
            f"limit-angle window [{lo:.3e}, {hi:.3e}] holds {n} samples, "
            f"need at least {FIT_MIN_SAMPLES}"
        )
    beta_plus, beta_minus = decay_exponents(mass_ratio, alpha)
    ss, vv = s[mask], v[mask]
    basis = np.column_stack(
        [np.ones_like(ss), ss**beta_plus, ss ** (3.0 * beta_plus), ss**beta_minus]
    )
    coef, *_ = np.linalg.lstsq(basis, vv, rcond=None)
    resid = basis @ coef - vv
    return LimitAngleFit(
        limit=float(coef[0]),
        coef_plus=float(coef[1]),
        coef_minus=float(coef[3]),
        rms_residual=float(np.sqrt(np.mean(resid * resid))),
        n_samples=n,
        window=(float(lo), float(hi)),
        exponents=(float(beta_plus), float(beta_minus)),
    )


@dataclass(frozen=True)
class RatioSeries:
    """Ratios of the path's radial data to the primary's, node by node.

    a = r / |q|, b = r' / |q|', c = r'' / |q|'' on the interior nodes,
    every derivative taken with the shared stencils.  The ``*_limit`` and
    ``*_spread`` fields hold the innermost-decade estimates.
    """

    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    a_limit: float
    a_spread: float
    b_limit: float
    b_spread: float
    c_limit: float
    c_spread: float


def ratio_limits(path, arc):
    """Radial ratio diagnostics of a path against a collision arc.

    The path must end (or start) at the arc's collision time t = 0; the
    ratios then probe the Sundman-type asymptotics of the path.  Apoapsis
    passages of elliptic arcs make b and c blow up mid-window; the series
    carry those values verbatim.
    """
    nodes = path.grid.nodes
    if not (nodes[0] == 0.0 or nodes[-1] == 0.0):
        raise DomainError("path interval must touch the collision at t = 0")
    r = np.abs(path.samples)
    r_q = arc.radius(nodes)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = r[1:-1] / r_q[1:-1]
        b = central_difference(nodes, r) / central_difference(nodes, r_q)
        c = second_difference(nodes, r) / second_difference(nodes, r_q)
    times = nodes[1:-1]
    a_limit, a_spread = innermost_decade_mean(times, a)
    b_limit, b_spread = innermost_decade_mean(times, b)
    c_limit, c_spread = innermost_decade_mean(times, c)
    return RatioSeries(times, a, b, c, a_limit, a_spread, b_limit, b_spread, c_limit, c_spread)


@dataclass(frozen=True)
class ThetaProfile:
    """Unwrapped polar angle along a path and its shape classification.

    ``verdict`` is one of ``constant_zero``, ``constant_pi``,
    ``monotone_decreasing``, ``monotone_increasing``, ``single_minimum``
    or ``other``; the first five are the shapes a minimizer may take.
    ``t_min`` marks the angle minimum.
    """

    times: np.ndarray
    theta: np.ndarray
    verdict: str
    t_min: float


def unwrap_angles(samples):
    """Continuous polar angle of nonzero complex samples."""
    if np.any(np.abs(samples) == 0.0):
        raise DomainError("angle undefined at a zero sample")
    theta = np.unwrap(np.angle(samples))
    jumps = np.abs(np.diff(theta))
    if jumps.size and jumps.max() > ANGLE_JUMP_LIMIT:
        raise MeshTooCoarseError(
            f"adjacent samples jump {jumps.max():.3f} rad in angle; refine the mesh"
        )
    return theta


def theta_profile(path):
    """Angle series of a path, skipping endpoints pinned at the origin."""
    keep = np.abs(path.samples) > 0.0
    lo = 0 if keep[0] else 1
    hi = keep.size if keep[-1] else keep.size - 1
    times = path.grid.nodes[lo:hi]
    theta = unwrap_angles(path.samples[lo:hi])
    verdict = _classify_profile(theta)
    t_min = float(times[np.argmin(theta)])
    return ThetaProfile(times, theta, verdict, t_min)


def _classify_profile(theta):
    span = float(theta.max() - theta.min())
    if np.all(np.abs(theta) <= 1e-9):
        return "constant_zero"
    if np.all(np.abs(np.abs(theta) - math.pi) <= 1e-9):
        return "constant_pi"
    d = np.diff(theta)
    if span <= _FLAT_TOL:
        return "other"
    falling = d < -_FLAT_TOL
    rising = d > _FLAT_TOL
    if not rising.any():
        return "monotone_decreasing"
    if not falling.any():
        return "monotone_increasing"
    first_rise = int(np.argmax(rising))
    last_fall = d.size - 1 - int(np.argmax(falling[::-1]))
    if last_fall < first_rise:
        return "single_minimum"
    return "other"


def angular_momentum(path):
    """J = z x z' at every node (one-sided stencils at the endpoints)."""
    nodes = path.grid.nodes
    z = path.samples
    v = np.empty_like(z)
    v[1:-1] = central_difference(nodes, z)
    v[0] = endpoint_derivative(nodes, z, "left")
    v[-1] = endpoint_derivative(nodes, z, "right")
    return (np.conj(z) * v).imag


def velocity_argument(path):
    """Direction of motion at the interior nodes.

    Returns ``(times, theta_d)`` with ``theta_d`` the unwrapped argument
    of the finite-difference velocity; zero-velocity samples leave NaN
    gaps rather than failing.
    """
    nodes = path.grid.nodes
    v = central_difference(nodes, path.samples)
    theta_d = np.full(v.shape, np.nan)
    moving = np.abs(v) > 0.0
    theta_d[moving] = np.unwrap(np.angle(v[moving]))
    return nodes[1:-1], theta_d


@dataclass(frozen=True)
class CollisionScan:
    """Closest approaches to the two bodies along a path."""

    min_dist_center: float
    t_center: float
    min_dist_primary: float
    t_primary: float


def _refined_minimum(times, dist):
    i = int(np.argmin(dist))
    t_best, d_best = float(times[i]), float(dist[i])
    if 0 < i < dist.size - 1:
        # parabola through the squared distances around the node minimum
        t3 = times[i - 1 : i + 2]
        y3 = dist[i - 1 : i + 2] ** 2
        denom = (t3[0] - t3[1]) * (t3[0] - t3[2]) * (t3[1] - t3[2])
        if denom != 0.0:
            aa = (t3[2] * (y3[1] - y3[0]) + t3[1] * (y3[0] - y3[2]) + t3[0] * (y3[2] - y3[1])) / denom
            bb = (t3[2] ** 2 * (y3[0] - y3[1]) + t3[1] ** 2 * (y3[2] - y3[0]) + t3[0] ** 2 * (y3[1] - y3[2])) / denom
            if aa > 0.0:
                t_v = -bb / (2.0 * aa)
                if t3[0] <= t_v <= t3[2]:
                    cc = y3[0] - aa * t3[0] ** 2 - bb * t3[0]
                    y_v = aa * t_v**2 + bb * t_v + cc
                    t_best, d_best = float(t_v), float(math.sqrt(max(y_v, 0.0)))
    return d_best, t_best


def collision_scan(path, params):
    """Minimum node distances to the center and the primary, refined.

    The refinement fits a parabola to the squared distance around the
    discrete minimum; endpoint minima (including constrained collisions)
    are reported as-is.
    """
    nodes = path.grid.nodes
    z = path.samples
    q = params.orbit.position(nodes)
    d_center, t_center = _refined_minimum(nodes, np.abs(z))
    d_primary, t_primary = _refined_minimum(nodes, np.abs(z - q))
    return CollisionScan(d_center, t_center, d_primary, t_primary)
