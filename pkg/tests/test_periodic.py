"""Rotation-extended orbits: closure arithmetic, mirroring, gluing."""

import math

import numpy as np
import pytest

import kepvar as kv
from kepvar.errors import DomainError


@pytest.mark.parametrize(
    "psi, expected",
    [
        (-0.8 * math.pi, 5),
        (-0.5 * math.pi, 4),
        (2.0 * math.pi / 7.0, 7),
        (0.6 * math.pi, 10),
        (0.0, 1),
        (1.0, None),  # 1/pi is irrational
        (math.pi / math.sqrt(2.0), None),
    ],
)
def test_closure_count(psi, expected):
    assert kv.closure_count(psi) == expected


@pytest.fixture(scope="module")
def pentagram():
    return kv.build_periodic(
        1.0,
        1.0,
        1.0,
        -0.8 * math.pi,
        mesh=kv.MeshSpec(n=48, gamma=1.5, levels=2, factor=4),
        solver=kv.SolverSpec(grad_tol=1e-6),
    )


def test_segment_is_a_conjugate_mirror(pentagram):
    sol = pentagram
    assert sol.report.converged
    assert sol.closure_k == 5
    assert sol.period == 2.0 * sol.half_period
    nodes = sol.segment.grid.nodes
    z = sol.segment.samples
    half = sol.report.path.grid.nodes
    assert nodes[0] == 0.0 and nodes[-1] == sol.period
    # z(2T - t) = conj(z(t)), node for node
    assert np.array_equal(nodes[: half.size], half)
    assert np.array_equal(nodes[half.size - 1 :], (sol.period - half)[::-1])
    assert np.array_equal(z, np.conj(z[::-1]))
    assert isinstance(sol.segment.left, kv.Ray)
    assert sol.segment.left.angle == pytest.approx(-0.4 * math.pi)
    assert sol.segment.right.angle == pytest.approx(0.4 * math.pi)


def test_closure_check_diagnostics(pentagram):
    sol = pentagram
    params = kv.FieldParams(1.0, 1.0, kv.extended_orbit(1.0, 1.0, sol.psi))
    check = kv.closure_check(sol, params)
    assert check.closure_k == 5
    assert check.closure_error is not None and check.closure_error < 1e-12
    assert check.mirror_action_gap < 1e-12
    assert check.orthogonality_start < 1e-2
    assert check.orthogonality_mid < 1e-2
    assert 0.0 <= check.junction_jump_mid < 1.0
    assert 0.0 <= check.junction_jump_end < 1.0


def test_sample_cycles_concatenates_rotated_arches(pentagram):
    sol = pentagram
    n_nodes = sol.segment.grid.nodes.size
    times, values = sol.sample_cycles(sol.closure_k)
    assert times.size == sol.closure_k * (n_nodes - 1) + 1
    assert np.all(np.diff(times) > 0.0)
    assert times[-1] == pytest.approx(sol.closure_k * sol.period, rel=1e-15)
    # each junction sample is the rotated start of the next arch
    seam = values[n_nodes - 1]
    assert seam == pytest.approx(values[0] * sol.rotation(1), rel=1e-12)
    # after closure_k arches the orbit bites its own tail
    assert abs(values[-1] - values[0]) < 1e-12
    assert abs(values[-1] - values[0]) == pytest.approx(
        sol.closure_error(), abs=1e-12
    )
    with pytest.raises(DomainError):
        sol.sample_cycles(0)


def test_zero_rotation_orbit_stays_on_the_real_axis():
    sol = kv.build_periodic(
        1.0,
        1.0,
        0.8,
        0.0,
        mesh=kv.MeshSpec(n=24, gamma=1.5, levels=1, factor=4),
        solver=kv.SolverSpec(grad_tol=1e-5),
    )
    assert sol.closure_k == 1
    assert sol.closure_error() == 0.0
    z = sol.segment.samples
    assert np.all(z.imag == 0.0)
    assert np.all(z.real > 0.0)
    assert np.all(kv.angular_momentum(sol.segment) == 0.0)


def test_irrational_rotation_never_closes():
    sol = kv.build_periodic(
        1.0,
        1.0,
        0.8,
        1.0,
        mesh=kv.MeshSpec(n=16, gamma=1.5, levels=1, factor=4),
        solver=kv.SolverSpec(grad_tol=1e-4),
    )
    assert sol.closure_k is None
    assert sol.closure_error() is None
    params = kv.FieldParams(1.0, 1.0, kv.extended_orbit(1.0, 0.8, 1.0))
    check = kv.closure_check(sol, params)
    assert check.closure_error is None
    times, values = sol.sample_cycles(3)
    assert times.size == 3 * (sol.segment.grid.nodes.size - 1) + 1
    assert np.all(np.abs(values) > 0.0)


@pytest.mark.parametrize("psi", [math.pi, -math.pi, 4.0])
def test_rotation_angle_outside_open_interval_is_rejected(psi):
    with pytest.raises(DomainError):
        kv.build_periodic(1.0, 1.0, 1.0, psi)
