"""Root structure of the radial ratio function h.

For a path written as z = a * |q| * e^{i theta} with the primary at
distance |q| on the ray of angle pi, the rescaled radial Euler-Lagrange
balance reduces to

    h(a, theta) = a**3 - 1 - k * a**2 (a + cos theta)
                                / (a**2 + 1 + 2 a cos theta)**(3/2)

with k = m / mu the mass ratio.  Its zeros at the boundary angles control
the asymptotic shape of collision solutions:

* alpha2: the unique zero of h(., 0) on (1, inf),
* alpha1 in (0, 1) and alpha3 in (1, inf): the zeros of h(., pi).

At theta = pi the quotient degenerates to a**2 sign(a - 1) / (a - 1)**2,
which is how it is evaluated here (the point (1, pi) itself is singular).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError

ROOT_RESIDUAL_TOL = 1e-12
_BISECT_ITER = 200


def eval_h(a, theta, mass_ratio):
    """h(a, theta) for scalar or array ``a``; ``theta`` in [0, pi]."""
    a = np.asarray(a, dtype=float)
    if np.any(a < 0.0):
        raise DomainError("radial ratio a must be non-negative")
    if not 0.0 <= theta <= math.pi + 1e-15:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    c = math.cos(theta)
    if c == -1.0:
        if np.any(a == 1.0):
            raise SingularityError("primary", "h is singular at (a, theta) = (1, pi)")
        # (a + c) / (a^2 + 1 + 2ac)^{3/2} collapses to sign(a-1)/(a-1)^2
        quotient = np.sign(a - 1.0) / (a - 1.0) ** 2
    else:
        squared = a * a + 1.0 + 2.0 * a * c
        quotient = (a + c) / squared**1.5
    return (a**3 - 1.0 - mass_ratio * a * a * quotient)[()]


def eval_h_dtheta(a, theta, mass_ratio):
    """Angular derivative of h; its sign is that of 1 - 2a^2 - a cos(theta)."""
    a = np.asarray(a, dtype=float)
    c = math.cos(theta)
    squared = a * a + 1.0 + 2.0 * a * c
    if np.any(squared <= 0.0):
        raise SingularityError("primary", "h is singular at (a, theta) = (1, pi)")
    return (
        mass_ratio
        * a
        * a
        * math.sin(theta)
        * (1.0 - 2.0 * a * a - a * c)
        / squared**2.5
    )[()]


def _eval_h_da(a, theta0_is_zero, mass_ratio):
    # d h / d a at the boundary angles, used for the Newton polish
    if theta0_is_zero:
        return 3.0 * a * a - mass_ratio * 2.0 * a / (a + 1.0) ** 3
    d = a - 1.0
    return 3.0 * a * a + mass_ratio * 2.0 * a / (d * d * abs(d))


def _bisect(f, lo, hi):
    """Plain bisection for a sign change bracketed on [lo, hi]."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    for _ in range(_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _polish(a, theta_zero, mass_ratio):
    for _ in range(4):
        slope = _eval_h_da(a, theta_zero, mass_ratio)
        if slope == 0.0:
            break
        theta = 0.0 if theta_zero else math.pi
        a = a - float(eval_h(a, theta, mass_ratio)) / slope
    return a


@dataclass(frozen=True)
class RootTriple:
    """The three boundary-angle zeros of h for one mass ratio."""

    mass_ratio: float
    alpha1: float
    alpha2: float
    alpha3: float

    @property
    def residuals(self) -> tuple[float, float, float]:
        return (
            float(eval_h(self.alpha1, math.pi, self.mass_ratio)),
            float(eval_h(self.alpha2, 0.0, self.mass_ratio)),
            float(eval_h(self.alpha3, math.pi, self.mass_ratio)),
        )


def find_alphas(mass_ratio):
    """Locate alpha1 < 1 < alpha2 < alpha3 for a positive mass ratio.

    Each zero is bracketed (growing the outer endpoint geometrically where
    needed), bisected to machine precision, and polished with a couple of
    Newton steps.  Raises ``NumericalFailure``/``DomainError`` when the
    bracket cannot be established.
    """
    if not mass_ratio > 0.0:
        raise DomainError(f"mass ratio must be positive, got {mass_ratio}")

    h_axis = lambda a: float(eval_h(a, 0.0, mass_ratio))
    h_anti = lambda a: float(eval_h(a, math.pi, mass_ratio))

    # alpha2: h(1, 0) = -k/4 < 0 and h -> +inf; expand the right endpoint
    hi = 2.0
    while h_axis(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("failed to bracket alpha2")
    alpha2 = _polish(_bisect(h_axis, 1.0, hi), True, mass_ratio)

    # alpha1: h(., pi) runs from -1 at a = 0 to +inf as a -> 1^-
    lo, hi = 1e-12, 1.0 - 1e-12
    while h_anti(hi) <= 0.0:
        hi = 0.5 * (hi + 1.0)
        if 1.0 - hi < 1e-15:
            raise DomainError("failed to bracket alpha1")
    alpha1 = _polish(_bisect(h_anti, lo, hi), False, mass_ratio)

    # alpha3: h(., pi) runs from -inf as a -> 1^+ to +inf
    lo = 1.0 + 1e-12
    hi = 2.0
    while h_anti(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("failed to bracket alpha3")
    alpha3 = _polish(_bisect(h_anti, lo, hi), False, mass_ratio)

    triple = RootTriple(mass_ratio, float(alpha1), float(alpha2), float(alpha3))
    worst = max(abs(res) for res in triple.residuals)
    if not (0.0 < triple.alpha1 < 1.0 < triple.alpha2 < triple.alpha3):
        raise DomainError(f"root ordering violated for mass ratio {mass_ratio}")
    if worst > ROOT_RESIDUAL_TOL:
        raise DomainError(f"root residual {worst:.3e} above {ROOT_RESIDUAL_TOL}")
    return triple


def coercivity_constant(phi, phi0):
    """min(sin^2((phi-phi0)/2), cos^2((phi-phi0)/2)) for distinct angles.

    This is the constant bounding the path space's quadratic growth for
    boundary rays of angles phi and phi0 in [0, pi).
    """
    if not (0.0 <= phi < math.pi and 0.0 <= phi0 < math.pi):
        raise DomainError("boundary angles must lie in [0, pi)")
    if phi == phi0:
        raise DomainError("coercivity degenerates for equal boundary angles")
    half = 0.5 * (phi - phi0)
    return min(math.sin(half) ** 2, math.cos(half) ** 2)
