"""Rectilinear (zero angular momentum) Kepler orbits that collide at t = 0.

The moving primary of the model lives on a fixed ray through the origin and
obeys the one-dimensional Kepler problem around a center of attraction of
strength ``mu``.  Its distance r(t) from the origin satisfies

    r'' = -mu / r**2,    r(0) = 0,    r(-t) = r(t),

and the orbit in the plane is q(t) = r(t) * exp(i*pi), i.e. the primary sits
on the negative real axis and hits the origin at t = 0.  The three energy
classes use the classical degenerate parametrizations:

* E < 0 (elliptic):    r = a(1 - cos u),  t = sqrt(a^3/mu) (u - sin u),
                       a = mu / (-2E), valid for one collision-to-collision
                       period |t| < 2*pi*sqrt(a^3/mu) / ... (see ``KeplerArc``)
* E = 0 (parabolic):   r = (9 mu / 2)**(1/3) |t|**(2/3), all t
* E > 0 (hyperbolic):  r = a(cosh F - 1), t = sqrt(a^3/mu) (sinh F - F),
                       a = mu / (2E), all t

The anomaly equations are solved by a safeguarded Newton iteration with a
bisection fallback; the cube-root initial guess handles the quadratic
degeneracy of the equations at the collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalFailure

ANOMALY_TOL = 1e-13
# The anomaly equations have a triple root at zero (u - sin u ~ u^3/6),
# where Newton degrades to linear convergence with ratio 2/3; reaching a
# 1e-13 step from O(1) then takes ~75 iterations, hence the high cap.
_ANOMALY_MAX_ITER = 128


def cubed_root_guess(scaled_time):
    """Leading-order anomaly near collision, u ~ (6 M)**(1/3)."""
    return np.cbrt(6.0 * np.asarray(scaled_time, dtype=float))


def _u_minus_sin(u):
    # u - sin(u); series below u = 1e-2 to dodge the cancellation
    u2 = u * u
    series = u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0)))
    return np.where(u < 1e-2, series, u - np.sin(u))


def _sinh_minus_f(f):
    # sinh(F) - F; same series with positive signs
    f2 = f * f
    series = f * f2 / 6.0 * (1.0 + f2 / 20.0 * (1.0 + f2 / 42.0 * (1.0 + f2 / 72.0)))
    return np.where(f < 1e-2, series, np.sinh(f) - f)


def _newton_bracketed(residual, slope, lo, hi, x0, label):
    """Safeguarded vectorized Newton for an increasing residual on [lo, hi].

    Keeps a sign-change bracket per element and falls back to bisection
    whenever a Newton step leaves it.  Terminates on steps below
    ``ANOMALY_TOL`` (absolute); raises ``NumericalFailure`` otherwise.
    """
    x = np.array(x0, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), x.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), x.shape).copy()
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(_ANOMALY_MAX_ITER):
        f = residual(x)
        done = done | (f == 0.0)
        below = (f <= 0.0) & ~done
        above = (f > 0.0) & ~done
        lo[below] = x[below]
        hi[above] = x[above]
        fp = slope(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / fp
        x_new = x - step
        bad = ~np.isfinite(x_new) | (x_new < lo) | (x_new > hi)
        x_new = np.where(bad, 0.5 * (lo + hi), x_new)
        x_new = np.where(done, x, x_new)
        done = done | (np.abs(x_new - x) <= ANOMALY_TOL)
        x = x_new
        if done.all():
            return x
    worst = float(np.max(np.abs(residual(x))))
    raise NumericalFailure(f"{label} anomaly iteration did not converge", worst)


def _eccentric_anomaly(m):
    """Solve u - sin(u) = m for u in [0, pi], m in [0, pi]."""
    guess = np.minimum(cubed_root_guess(m), math.pi)
    return _newton_bracketed(
        lambda u: _u_minus_sin(u) - m,
        lambda u: 2.0 * np.sin(0.5 * u) ** 2,
        0.0,
        math.pi,
        guess,
        "elliptic",
    )


def _hyperbolic_anomaly(m):
    """Solve sinh(F) - F = m for F >= 0."""
    hi = cubed_root_guess(m)
    guess = np.minimum(hi, np.arcsinh(np.asarray(m, dtype=float)) + 1.0)
    return _newton_bracketed(
        lambda f: _sinh_minus_f(f) - m,
        lambda f: 2.0 * np.sinh(0.5 * f) ** 2,
        0.0,
        hi,
        guess,
        "hyperbolic",
    )


def parabolic_scale(mu):
    """Prefactor of the zero-energy power law, (9 mu / 2)**(1/3)."""
    return (4.5 * mu) ** (1.0 / 3.0)


@dataclass(frozen=True)
class KeplerArc:
    """A rectilinear Kepler orbit with its collision at t = 0.

    ``radius`` / ``radial_velocity`` give r(t) = |q(t)| and dr/dt;
    ``position`` / ``velocity`` place the orbit on the negative real axis.
    For E < 0 evaluation is restricted to one collision-to-collision period
    centered at the collision, |t| < ``period``.
    """

    mu: float
    energy: float

    def __post_init__(self):
        if not self.mu > 0.0:
            raise DomainError(f"mu must be positive, got {self.mu}")

    @property
    def semi_axis(self) -> float | None:
        """Degenerate semi-major axis a = mu / (2|E|); None for E = 0."""
        if self.energy == 0.0:
            return None
        return self.mu / (2.0 * abs(self.energy))

    @property
    def t_apoapsis(self) -> float | None:
        """Time from collision to apoapsis (elliptic arcs only)."""
        if self.energy >= 0.0:
            return None
        a = self.semi_axis
        return math.pi * math.sqrt(a**3 / self.mu)

    @property
    def period(self) -> float | None:
        """Collision-to-collision period, 2 * t_apoapsis (elliptic only)."""
        t_apo = self.t_apoapsis
        return None if t_apo is None else 2.0 * t_apo

    @property
    def apoapsis_radius(self) -> float | None:
        a = self.semi_axis
        return None if self.energy >= 0.0 else 2.0 * a

    def _eval(self, t):
        """Return (r, rdot) arrays for times t inside the validity window."""
        t = np.asarray(t, dtype=float)
        s = np.abs(t)
        sign = np.sign(t)
        if self.energy < 0.0:
            a = self.semi_axis
            scale = math.sqrt(a**3 / self.mu)
            m = s / scale
            if np.any(m >= 2.0 * math.pi):
                raise DomainError(
                    "elliptic arc evaluated outside one collision-to-collision "
                    f"period |t| < {2.0 * math.pi * scale!r}"
                )
            # solve on the outgoing half [0, pi], reflect the infalling half
            refl = m > math.pi
            u = _eccentric_anomaly(np.where(refl, 2.0 * math.pi - m, m))
            one_minus_cos = 2.0 * np.sin(0.5 * u) ** 2
            r = a * one_minus_cos
            with np.errstate(divide="ignore", invalid="ignore"):
                rdot = math.sqrt(self.mu / a) * np.sin(u) / one_minus_cos
            rdot = np.where(refl, -rdot, rdot)
        elif self.energy == 0.0:
            lam = parabolic_scale(self.mu)
            r = lam * s ** (2.0 / 3.0)
            with np.errstate(divide="ignore"):
                rdot = (2.0 / 3.0) * lam / np.cbrt(s)
        else:
            a = self.semi_axis
            scale = math.sqrt(a**3 / self.mu)
            f = _hyperbolic_anomaly(s / scale)
            cosh_minus_one = 2.0 * np.sinh(0.5 * f) ** 2
            r = a * cosh_minus_one
            with np.errstate(divide="ignore", invalid="ignore"):
                rdot = math.sqrt(self.mu / a) * np.sinh(f) / cosh_minus_one
        # at the collision itself the radial speed is unbounded
        rdot = np.where(s == 0.0, np.inf, rdot * np.where(sign == 0.0, 1.0, sign))
        return r, rdot

    def radius(self, t):
        return self._eval(t)[0][()]

    def radial_velocity(self, t):
        return self._eval(t)[1][()]

    def position(self, t):
        """q(t) = r(t) e^{i pi} as a complex number (array-aware)."""
        r = self._eval(t)[0]
        return (-r + 0.0j)[()]

    def velocity(self, t):
        rdot = self._eval(t)[1]
        return (-rdot + 0.0j)[()]


def kepler_radius(mu, energy, t):
    """Distance from the center and radial velocity of a collision orbit.

    Returns the pair (r, dr/dt) evaluated at time(s) ``t`` for the
    rectilinear Kepler orbit of attraction strength ``mu`` and energy
    ``energy`` whose collision happens at t = 0.
    """
    arc = KeplerArc(mu, energy)
    r, rdot = arc._eval(t)
    return r[()], rdot[()]


def arc_from_apoapsis(mu, apoapsis_radius):
    """Collision arc turning around at distance ``apoapsis_radius``.

    Returns ``(arc, t_fall)`` where the orbit is at rest at distance
    ``apoapsis_radius`` at time -t_fall and collides at t = 0.
    """
    if not apoapsis_radius > 0.0:
        raise DomainError(f"apoapsis radius must be positive, got {apoapsis_radius}")
    arc = KeplerArc(mu, -mu / apoapsis_radius)
    return arc, arc.t_apoapsis


def arc_from_boundary(mu, radius, radial_velocity):
    """Collision arc through a prescribed boundary state.

    Returns ``(arc, t_fall)`` such that r(-t_fall) = radius and
    dr/dt(-t_fall) = radial_velocity, with the first subsequent collision
    at t = 0.  States that never reach a collision going forward
    (non-negative energy moving outward) raise ``DomainError``.
    """
    if not radius > 0.0:
        raise DomainError(f"boundary radius must be positive, got {radius}")
    energy = 0.5 * radial_velocity**2 - mu / radius
    arc = KeplerArc(mu, energy)
    # mirror symmetry: the state at -T equals the forward state at T with
    # the radial velocity negated, so solve r(T) = radius, rdot(T) = -v.
    # The anomaly comes from its sine, sqrt(x (2 -+ x)) with x = r/a; the
    # naive arccos/arccosh of 1 -+ x sheds all precision once x nears the
    # rounding floor (a near-parabolic state has a huge semi-axis).
    if energy < 0.0:
        a = arc.semi_axis
        scale = math.sqrt(a**3 / mu)
        x = min(radius / a, 2.0)
        u = math.atan2(math.sqrt(x * (2.0 - x)), 1.0 - x)
        m = float(_u_minus_sin(u))
        if radial_velocity > 0.0:
            m = 2.0 * math.pi - m
        t_fall = scale * m
    elif radial_velocity >= 0.0:
        raise DomainError(
            "state with non-negative energy moving outward never reaches a collision"
        )
    elif energy == 0.0:
        t_fall = (radius / parabolic_scale(mu)) ** 1.5
    else:
        a = arc.semi_axis
        scale = math.sqrt(a**3 / mu)
        x = radius / a
        f = math.asinh(math.sqrt(x * (2.0 + x)))
        t_fall = scale * float(_sinh_minus_f(f))
    return arc, t_fall


@dataclass(frozen=True)
class ExtendedOrbit:
    """A collision arc extended over all time by repeated ray rotation.

    The orbit collides at every even multiple of ``half_period``; on the
    interval (2kT, 2(k+1)T) it runs along the ray of angle pi - k*psi,
    so consecutive intervals differ by the rotation e^{-i psi}.
    """

    mu: float
    half_period: float
    psi: float
    arc: KeplerArc

    @property
    def apoapsis_radius(self) -> float:
        return self.arc.apoapsis_radius

    def interval_index(self, t):
        """Index k of the interval (2kT, 2(k+1)T) containing t."""
        k = np.floor(np.asarray(t, dtype=float) / (2.0 * self.half_period))
        return k.astype(int)[()]

    def ray_angle(self, k):
        """Angle pi - k*psi of the ray carrying interval k."""
        return math.pi - np.asarray(k, dtype=float) * self.psi

    def _reduce(self, t):
        t = np.asarray(t, dtype=float)
        two_t = 2.0 * self.half_period
        k = np.floor(t / two_t)
        local = t - two_t * k
        # roundoff can push local onto 2T exactly; that is the next collision
        wrap = local >= two_t
        k = k + wrap
        local = np.where(wrap, 0.0, local)
        return k, local

    def radius(self, t):
        return self.arc.radius(self._reduce(t)[1])

    def position(self, t):
        # -r * e^{-i k psi} equals r * e^{i(pi - k psi)} but keeps the
        # k = 0 interval exactly on the real axis
        k, local = self._reduce(t)
        r, _ = self.arc._eval(local)
        return (-r * np.exp(-1j * (k * self.psi)))[()]

    def velocity(self, t):
        k, local = self._reduce(t)
        _, rdot = self.arc._eval(local)
        return (-rdot * np.exp(-1j * (k * self.psi)))[()]


def extended_orbit(mu, half_period, psi):
    """Periodically extended collision orbit with rotation angle ``psi``.

    ``half_period`` is the collision-to-apoapsis time of each arch; the
    degenerate semi-axis follows from Kepler's third law,
    a = (mu * T**2 / pi**2)**(1/3).
    """
    if not half_period > 0.0:
        raise DomainError(f"half period must be positive, got {half_period}")
    a = (mu * half_period**2 / math.pi**2) ** (1.0 / 3.0)
    arc = KeplerArc(mu, -mu / (2.0 * a))
    return ExtendedOrbit(mu, half_period, psi, arc)
