"""Collision Kepler orbits: closed forms, an ODE oracle, and conventions."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import kepvar as kv
from kepvar.errors import DomainError

MU_DEFAULT = 1.0


def integrate_radius(mu, r0, v0, times):
    """Independent radial integration of r'' = -mu / r**2 (DOP853)."""

    def rhs(_, y):
        return [y[1], -mu / y[0] ** 2]

    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        [r0, v0],
        t_eval=times,
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
    )
    assert sol.success
    return sol.y[0], sol.y[1]


def test_apoapsis_fall_time_closed_form():
    arc, t_fall = kv.arc_from_apoapsis(1.0, 1.0)
    assert t_fall == pytest.approx(math.pi / math.sqrt(8.0), abs=1e-15)
    assert arc.energy == pytest.approx(-1.0)
    assert arc.apoapsis_radius == pytest.approx(1.0)
    arc4, t_fall4 = kv.arc_from_apoapsis(4.0, 1.0)
    assert t_fall4 == pytest.approx(0.5553603672697958, abs=1e-15)
    assert arc4.t_apoapsis == pytest.approx(t_fall4)
    assert arc4.period == pytest.approx(2.0 * t_fall4)


def test_parabolic_scale_and_radius():
    lam = kv.parabolic_scale(1.0)
    assert lam**3 == pytest.approx(4.5, rel=1e-15)
    r, rdot = kv.kepler_radius(1.0, 0.0, math.sqrt(2.0 / 9.0))
    assert r == pytest.approx(1.0, rel=1e-14)
    assert rdot == pytest.approx((2.0 / 3.0) * lam / (2.0 / 9.0) ** (1.0 / 6.0), rel=1e-13)
    times = np.array([-0.8, -0.1, 0.2, 1.5])
    radii = kv.KeplerArc(1.0, 0.0).radius(times)
    assert radii == pytest.approx(lam * np.abs(times) ** (2.0 / 3.0), rel=1e-14)


@pytest.mark.parametrize("energy", [-1.0, 0.0, 0.7])
def test_radius_matches_ode_integration(energy):
    arc = kv.KeplerArc(MU_DEFAULT, energy)
    t0 = -1.0 if energy >= 0.0 else -0.98 * arc.t_apoapsis
    times = np.linspace(t0, -1e-3, 200)
    r0 = arc.radius(times[0])
    v0 = arc.radial_velocity(times[0])
    r_ode, v_ode = integrate_radius(MU_DEFAULT, r0, v0, times)
    assert arc.radius(times) == pytest.approx(r_ode, rel=1e-9)
    assert arc.radial_velocity(times) == pytest.approx(v_ode, rel=1e-8)


@pytest.mark.parametrize("energy", [-0.5, 0.0, 0.7])
def test_energy_conservation(energy):
    arc = kv.KeplerArc(MU_DEFAULT, energy)
    if energy < 0.0:
        times = np.linspace(-0.95 * arc.t_apoapsis, -1e-2, 97)
    else:
        times = np.concatenate([-np.logspace(-2, 1, 50), np.logspace(-2, 1, 50)])
    r = arc.radius(times)
    v = arc.radial_velocity(times)
    assert 0.5 * v**2 - MU_DEFAULT / r == pytest.approx(energy, abs=1e-9)


@pytest.mark.parametrize("energy", [-1.0, 0.0, 0.7])
def test_time_reflection_symmetry(energy):
    arc = kv.KeplerArc(MU_DEFAULT, energy)
    times = np.linspace(1e-3, 1.0, 37)
    assert np.array_equal(arc.radius(-times), arc.radius(times))
    assert np.array_equal(arc.radial_velocity(-times), -arc.radial_velocity(times))


def test_position_sits_on_negative_real_axis():
    arc = kv.KeplerArc(1.0, -1.0)
    q = arc.position(np.array([-0.5, -0.1]))
    assert np.all(q.real < 0.0)
    assert np.all(q.imag == 0.0)
    assert np.array_equal(np.abs(q), arc.radius(np.array([-0.5, -0.1])))
    assert arc.position(0.0) == 0.0


def test_collision_values():
    for energy in (-1.0, 0.0, 0.7):
        arc = kv.KeplerArc(1.0, energy)
        assert arc.radius(0.0) == 0.0
        assert arc.radial_velocity(0.0) == math.inf


def test_near_collision_triple_root_regression():
    # the anomaly equations degenerate to a triple root at t = 0; tiny
    # times must still converge and match the universal 2/3 law
    lam = kv.parabolic_scale(1.0)
    for energy in (-1.0, 0.7):
        arc = kv.KeplerArc(1.0, energy)
        times = np.array([1e-14, 1e-10, 1e-6])
        assert arc.radius(times) == pytest.approx(lam * times ** (2.0 / 3.0), rel=1e-4)


def test_elliptic_window_is_enforced():
    arc = kv.KeplerArc(1.0, -1.0)
    period = arc.period
    arc.radius(0.999 * period)  # inside the window
    with pytest.raises(DomainError):
        arc.radius(1.001 * period)
    with pytest.raises(DomainError):
        arc.radius(-period)


def test_invalid_parameters():
    with pytest.raises(DomainError):
        kv.KeplerArc(0.0, -1.0)
    with pytest.raises(DomainError):
        kv.arc_from_apoapsis(1.0, 0.0)
    with pytest.raises(DomainError):
        kv.arc_from_boundary(1.0, -1.0, 0.0)


def test_boundary_state_conventions():
    for v in (-0.7, 0.0, 0.9):  # falling, at rest, rising (elliptic)
        arc, t_fall = kv.arc_from_boundary(1.0, 0.8, v)
        assert t_fall > 0.0
        assert arc.radius(-t_fall) == pytest.approx(0.8, rel=1e-12)
        assert arc.radial_velocity(-t_fall) == pytest.approx(v, abs=1e-12)
    # boundary at rest reproduces the apoapsis construction
    arc_rest, t_rest = kv.arc_from_boundary(1.0, 1.0, 0.0)
    _, t_apo = kv.arc_from_apoapsis(1.0, 1.0)
    assert t_rest == pytest.approx(t_apo, rel=1e-12)
    assert arc_rest.energy == pytest.approx(-1.0)
    # hyperbolic infall
    arc_h, t_h = kv.arc_from_boundary(1.0, 1.0, -2.0)
    assert arc_h.energy == pytest.approx(1.0)
    assert arc_h.radius(-t_h) == pytest.approx(1.0, rel=1e-12)
    assert arc_h.radial_velocity(-t_h) == pytest.approx(-2.0, abs=1e-12)
    # zero-energy infall
    arc_p, t_p = kv.arc_from_boundary(1.0, 1.0, -math.sqrt(2.0))
    assert arc_p.energy == pytest.approx(0.0, abs=1e-15)
    assert arc_p.radius(-t_p) == pytest.approx(1.0, rel=1e-12)


def test_escaping_state_rejected():
    with pytest.raises(DomainError):
        kv.arc_from_boundary(1.0, 1.0, 2.0)  # hyperbolic, outward
    with pytest.raises(DomainError):
        kv.arc_from_boundary(1.0, 1.0, math.sqrt(2.0))  # parabolic, outward


def test_extended_orbit_geometry():
    psi = -0.8 * math.pi
    orbit = kv.extended_orbit(1.0, 1.0, psi)
    # Kepler's third law fixes the arc from the half period
    assert orbit.arc.t_apoapsis == pytest.approx(1.0, rel=1e-12)
    assert orbit.interval_index(0.5) == 0
    assert orbit.interval_index(2.5) == 1
    assert orbit.interval_index(-0.5) == -1
    assert orbit.ray_angle(0) == pytest.approx(math.pi)
    assert orbit.ray_angle(2) == pytest.approx(math.pi - 2.0 * psi)
    with pytest.raises(DomainError):
        kv.extended_orbit(1.0, 0.0, psi)


def test_extended_orbit_rotation_between_arches():
    psi = -0.8 * math.pi
    orbit = kv.extended_orbit(1.0, 1.0, psi)
    times = np.linspace(0.125, 1.875, 15)  # dyadic, so t + 2 is exact
    assert np.array_equal(orbit.radius(times + 2.0), orbit.radius(times))
    ratio = orbit.position(times + 2.0) / orbit.position(times)
    assert ratio == pytest.approx(np.exp(-1j * psi), abs=1e-14)
    ratio_v = orbit.velocity(times + 2.0) / orbit.velocity(times)
    assert ratio_v == pytest.approx(np.exp(-1j * psi), abs=1e-14)


def test_extended_orbit_first_arch_matches_arc():
    orbit = kv.extended_orbit(1.0, 1.0, -0.8 * math.pi)
    times = np.linspace(0.05, 1.95, 20)
    assert np.array_equal(orbit.position(times), orbit.arc.position(times))
