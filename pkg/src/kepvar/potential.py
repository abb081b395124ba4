"""Gravitational field of a fixed center plus a moving collision primary.

The massless test particle at z (complex plane) feels

    U(z, t) = mu / |z| + m / |z - q(t)|

where q(t) is the primary's orbit.  The force is the plane gradient of U,

    F(z, t) = -mu z / |z|**3 - m (z - q) / |z - q|**3,

identified with a complex number.  Both bodies carry hard singularities:
no softening is applied anywhere, and evaluations closer to a body than
``SINGULARITY_RADIUS`` raise ``SingularityError`` naming the body.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularityError
from .kepler import ExtendedOrbit, KeplerArc

SINGULARITY_RADIUS = 1e-300


@dataclass(frozen=True)
class FieldParams:
    """Masses and primary orbit defining the field.

    ``mu`` is the strength of the fixed center at the origin, ``m`` the
    strength of the moving primary, and ``orbit`` supplies q(t).
    """

    mu: float
    m: float
    orbit: KeplerArc | ExtendedOrbit

    @property
    def mass_ratio(self) -> float:
        return self.m / self.mu


def _checked_norms(z, q):
    dist_center = np.abs(z)
    dist_primary = np.abs(z - q)
    if np.any(dist_center < SINGULARITY_RADIUS):
        raise SingularityError("center")
    if np.any(dist_primary < SINGULARITY_RADIUS):
        raise SingularityError("primary")
    return dist_center, dist_primary


def pair_potential(mu, m, z, q):
    """U for explicit primary positions ``q`` (vectorized kernel)."""
    z = np.asarray(z, dtype=complex)
    dist_center, dist_primary = _checked_norms(z, q)
    return (mu / dist_center + m / dist_primary)[()]


def pair_force(mu, m, z, q):
    """Plane gradient of U for explicit primary positions (vectorized)."""
    z = np.asarray(z, dtype=complex)
    dist_center, dist_primary = _checked_norms(z, q)
    return (-mu * z / dist_center**3 - m * (z - q) / dist_primary**3)[()]


def potential(params, z, t):
    """U(z, t) for the configured field (scalar or array ``z``, ``t``)."""
    return pair_potential(params.mu, params.m, z, params.orbit.position(t))


def force(params, z, t):
    """F(z, t), the plane gradient of U, as a complex number."""
    return pair_force(params.mu, params.m, z, params.orbit.position(t))


def angular_monotonicity_check(params, r, t, n_angles=241):
    """Check that U(r e^{i theta}, t) grows with |theta| on [-pi, pi].

    With the primary on the negative real axis the potential at fixed
    radius is smallest at theta = 0 and largest at theta = +-pi; this
    samples a symmetric angle grid and verifies that ordering, strictly
    whenever the primary is away from the origin.  Returns bool.
    """
    thetas = np.linspace(0.0, np.pi, n_angles)
    q = params.orbit.position(t)
    z = r * np.exp(1j * thetas)
    values = pair_potential(params.mu, params.m, z, q)
    mirrored = pair_potential(params.mu, params.m, np.conj(z), q)
    if not np.array_equal(values, mirrored):
        return False
    diffs = np.diff(values)
    if np.abs(q) == 0.0:
        # primary at the origin: U is radially symmetric (up to the
        # rounding of |r e^{i theta}| across the angle grid)
        tol = 16.0 * np.finfo(float).eps * float(np.max(values))
        return bool(np.all(np.abs(diffs) <= tol))
    return bool(np.all(diffs > 0.0))
