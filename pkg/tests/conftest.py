"""Shared fixtures and the acceptance-summary reporter."""

import math

import pytest

import kepvar as kv

ACCEPTANCE_LINES = []


def record_acceptance(ok, line):
    """Collect one pass/fail line for the end-of-run summary."""
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {line}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit_apoapsis():
    """Arc at rest at distance 1 for mu = 1, with its fall time."""
    arc, t_fall = kv.arc_from_apoapsis(1.0, 1.0)
    return arc, t_fall


@pytest.fixture(scope="session")
def apoapsis_params(unit_apoapsis):
    arc, _ = unit_apoapsis
    return kv.FieldParams(1.0, 1.0, arc)


@pytest.fixture(scope="session")
def ray_fall_report(apoapsis_params, unit_apoapsis):
    """Converged solve: vertical ray at the apoapsis end, collision at t = 0."""
    _, t_fall = unit_apoapsis
    config = kv.ProblemConfig(
        params=apoapsis_params,
        t_start=-t_fall,
        t_end=0.0,
        left=kv.Ray(0.5 * math.pi),
        right=kv.Origin(),
        mesh=kv.MeshSpec(n=64, gamma=1.5, levels=2, factor=4),
        solver=kv.SolverSpec(grad_tol=1e-6),
    )
    return kv.solve(config), config
