"""Acceptance gate: one test per shipped guarantee, each timed.

Every test records a single PASS/FAIL line (printed in the terminal
summary) carrying the measured numbers next to their bounds.
"""

import json
import math
import time

import numpy as np

import kepvar as kv
from conftest import record_acceptance
from kepvar.cli import main

TWO_THIRDS = 2.0 / 3.0


# --- criterion 1: root finder against a brute-force sign scan ---------------


def h_closed_form(a, theta_is_zero, k):
    """h at the two boundary angles, in closed form."""
    a = np.asarray(a, dtype=float)
    if theta_is_zero:
        return a**3 - 1.0 - k * a * a / (1.0 + a) ** 2
    return a**3 - 1.0 - k * a * a * np.sign(a - 1.0) / (a - 1.0) ** 2


def scan_root(theta_is_zero, k, lo, hi):
    """Locate the sign change on a 1e5-point grid, then bisect it down."""
    grid = np.linspace(lo, hi, 100_000)
    values = h_closed_form(grid, theta_is_zero, k)
    crossings = np.nonzero(np.diff(np.sign(values)) != 0)[0]
    assert crossings.size == 1, "expected exactly one sign change in the bracket"
    a_lo, a_hi = grid[crossings[0]], grid[crossings[0] + 1]
    f_lo = h_closed_form(a_lo, theta_is_zero, k)
    while True:
        mid = 0.5 * (a_lo + a_hi)
        if mid == a_lo or mid == a_hi:
            return mid
        f_mid = h_closed_form(mid, theta_is_zero, k)
        if f_lo * f_mid <= 0.0:
            a_hi = mid
        else:
            a_lo, f_lo = mid, f_mid


def test_criterion_1_alpha_roots():
    t0 = time.perf_counter()
    worst_residual = 0.0
    worst_gap = 0.0
    ordered = True
    for k in (0.5, 1.0, 2.0):
        triple = kv.find_alphas(k)
        ordered &= 0.0 < triple.alpha1 < 1.0 < triple.alpha2 < triple.alpha3
        worst_residual = max(
            worst_residual,
            abs(kv.eval_h(triple.alpha1, math.pi, k)),
            abs(kv.eval_h(triple.alpha2, 0.0, k)),
            abs(kv.eval_h(triple.alpha3, math.pi, k)),
        )
        worst_gap = max(
            worst_gap,
            abs(triple.alpha1 - scan_root(False, k, 1e-9, 1.0 - 1e-9)),
            abs(triple.alpha2 - scan_root(True, k, 1.0, 8.0)),
            abs(triple.alpha3 - scan_root(False, k, 1.0 + 1e-9, 8.0)),
        )
    elapsed = time.perf_counter() - t0
    ok = ordered and worst_residual < 1e-12 and worst_gap < 1e-10 and elapsed < 1.0
    record_acceptance(
        ok,
        f"criterion 1  alpha roots: residual {worst_residual:.1e} (<1e-12), "
        f"scan gap {worst_gap:.1e} (<1e-10), {elapsed:.2f}s (<1s)",
    )
    assert ordered
    assert worst_residual < 1e-12
    assert worst_gap < 1e-10
    assert elapsed < 1.0


# --- criterion 2: analytic gradient against central differences -------------


def smooth_profile(rng, s, lo, hi):
    base = lo + (hi - lo) * (0.25 + 0.5 * rng.random())
    wave = np.zeros_like(s)
    for k in (1, 2, 3):
        wave += (rng.normal(0.0, 0.12) / k) * np.cos(k * math.pi * s + 2.0 * math.pi * rng.random())
    return np.clip(base + wave, lo, hi)


def random_admissible_path(rng, grid, s):
    radius = smooth_profile(rng, s, 0.4, 1.4)
    angle = smooth_profile(rng, s, 0.3, 2.2)
    kinds = rng.integers(0, 3, size=2)
    width = 3.0 / (s.size - 1)
    if kinds[0] == 1:
        radius = radius * np.tanh(s / width)
    if kinds[1] == 1:
        radius = radius * np.tanh((1.0 - s) / width)
    z = radius * np.exp(1j * angle)
    sides = []
    for kind, idx in zip(kinds, (0, -1)):
        if kind == 0:
            sides.append(kv.Ray(float(angle[idx])))
        elif kind == 1:
            sides.append(kv.Origin())
        else:
            sides.append(kv.FixedPoint(complex(z[idx])))
    return kv.DiscretePath(grid, z, sides[0], sides[1])


def test_criterion_2_gradient_matches_finite_differences(apoapsis_params, unit_apoapsis):
    t0 = time.perf_counter()
    _, t_fall = unit_apoapsis
    grid = kv.build_grid(-t_fall, 0.0, 64, 1.0)
    s = (grid.nodes - grid.nodes[0]) / (grid.nodes[-1] - grid.nodes[0])
    rng = np.random.default_rng(20260814)
    step = 1e-7
    worst = 0.0
    for _ in range(50):
        path = random_admissible_path(rng, grid, s)
        g = kv.action_gradient(path, apoapsis_params)
        x = kv.free_coordinates(path)
        fd = np.empty_like(x)
        for i in range(x.size):
            bumped = x.copy()
            bumped[i] = x[i] + step
            up = kv.discrete_action(kv.with_free_coordinates(path, bumped), apoapsis_params)
            bumped[i] = x[i] - step
            down = kv.discrete_action(kv.with_free_coordinates(path, bumped), apoapsis_params)
            fd[i] = (up - down) / (2.0 * step)
        scale = max(float(np.max(np.abs(g))), 1e-12)
        worst = max(worst, float(np.max(np.abs(fd - g))) / scale)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 10.0
    record_acceptance(
        ok,
        f"criterion 2  action gradient: 50 paths, worst rel error {worst:.1e} "
        f"(<1e-6), {elapsed:.2f}s (<10s)",
    )
    assert worst < 1e-6
    assert elapsed < 10.0


# --- criterion 3: homothetic paths annihilate the scaled EL residual --------


def homothetic_residual(alpha, sign, n, params):
    grid = kv.build_grid(-1.0, 0.0, n, 1.5)
    r = alpha * kv.parabolic_scale(1.0) * np.abs(grid.nodes) ** TWO_THIRDS
    z = sign * r + 0.0j
    path = kv.DiscretePath(grid, z, kv.FixedPoint(complex(z[0])), kv.Origin())
    el = np.abs(kv.el_residual(path, params))
    times = np.abs(grid.nodes[1:-1])
    mask = (times >= 0.02) & (times <= 0.9)
    return float(np.max(el[mask] * r[1:-1][mask] ** 2))


def test_criterion_3_homothetic_radial_balance():
    t0 = time.perf_counter()
    params = kv.FieldParams(1.0, 1.0, kv.KeplerArc(1.0, 0.0))
    triple = kv.find_alphas(1.0)
    levels = (256, 1024, 4096)
    shrinks = True
    worst_lines = []
    for alpha, sign in ((triple.alpha2, 1.0), (triple.alpha1, -1.0), (triple.alpha3, -1.0)):
        values = [homothetic_residual(alpha, sign, n, params) for n in levels]
        shrinks &= all(values[i + 1] <= 0.5 * values[i] for i in range(len(values) - 1))
        worst_lines.append(values[-1])
    off = [homothetic_residual(1.15 * triple.alpha2, 1.0, n, params) for n in levels]
    floor_holds = min(off) > 0.2
    elapsed = time.perf_counter() - t0
    ok = shrinks and floor_holds and elapsed < 30.0
    record_acceptance(
        ok,
        f"criterion 3  homothetic balance: residuals halve per level "
        f"(finest {max(worst_lines):.1e}), off-root floor {min(off):.2f} (>0.2), "
        f"{elapsed:.2f}s (<30s)",
    )
    assert shrinks
    assert floor_holds
    assert elapsed < 30.0


# --- criterion 4: forced collision reproduces the t^(2/3) law ---------------


def test_criterion_4_sundman_asymptotics(tmp_path):
    t0 = time.perf_counter()
    run = {
        "label": "acceptance-sundman",
        "mu": 1.0,
        "m": 1.0,
        "arc": {"kind": "energy", "energy": 0.0},
        "t_fall": 1.0,
        "window": "fall",
        "left": {"ray": 0.0},
        "right": "origin",
        "mesh": {"n": 256, "gamma": 1.5, "levels": 3, "factor": 4},
        "solver": {"grad_tol": 1e-6},
    }
    run_path = tmp_path / "run.json"
    run_path.write_text(json.dumps(run))
    rc = main(["sundman", "--run", str(run_path), "--out-dir", str(tmp_path)])
    doc = json.loads((tmp_path / "acceptance-sundman.report.json").read_text())
    exponent = doc["analysis"]["fit"]["exponent"]
    a_limit = doc["analysis"]["ratios"]["a_limit"]
    alpha2 = kv.find_alphas(1.0).alpha2
    exp_err = abs(exponent / TWO_THIRDS - 1.0)
    a_err = abs(a_limit / alpha2 - 1.0)
    elapsed = time.perf_counter() - t0
    ok = rc == 0 and exp_err < 0.01 and a_err < 0.02 and elapsed < 120.0
    record_acceptance(
        ok,
        f"criterion 4  collision power law: exponent {exponent:.4f} "
        f"(2/3 within 1%), a -> {a_limit:.4f} vs alpha2 {alpha2:.4f} (within 2%), "
        f"{elapsed:.1f}s (<120s)",
    )
    assert rc == 0
    assert exp_err < 0.01
    assert a_err < 0.02
    assert elapsed < 120.0


# --- criterion 5: the collision angle unwinds to zero -----------------------


def test_criterion_5_forced_collision_angle_decays():
    t0 = time.perf_counter()
    params = kv.FieldParams(1.0, 1.0, kv.KeplerArc(1.0, 0.0))
    verdicts = []
    limits = []
    for phi in (math.pi / 6.0, math.pi / 3.0, math.pi / 2.0):
        config = kv.ProblemConfig(
            params=params,
            t_start=-1.0,
            t_end=0.0,
            left=kv.Ray(phi),
            right=kv.Origin(),
            mesh=kv.MeshSpec(n=256, gamma=2.0, levels=4, factor=4),
            solver=kv.SolverSpec(grad_tol=2e-4),
        )
        report = kv.solve(config)
        verdicts.append(report.theta_verdict)
        limits.append(report.theta_limit)
    all_decreasing = all(v == "monotone_decreasing" for v in verdicts)
    all_small = all(limit is not None and abs(limit) < 0.05 for limit in limits)
    elapsed = time.perf_counter() - t0
    ok = all_decreasing and all_small and elapsed < 300.0
    worst_limit = max((abs(limit) for limit in limits if limit is not None), default=float("nan"))
    record_acceptance(
        ok,
        f"criterion 5  angle unwinding: 3 launch angles monotone to theta "
        f"{worst_limit:.1e} (<0.05 rad), {elapsed:.1f}s (<300s)",
    )
    assert all_decreasing, verdicts
    assert all_small, limits
    assert elapsed < 300.0


# --- criterion 6: free-collision arcs between rays ---------------------------


def test_criterion_6_ray_to_ray_minimizers(unit_apoapsis, apoapsis_params):
    t0 = time.perf_counter()
    _, t_fall = unit_apoapsis
    pairs = (
        (0.75 * math.pi, 0.25 * math.pi),
        (0.5 * math.pi, 0.0),
        (math.pi / 6.0, 0.5 * math.pi),
    )
    failures = []
    worst_trans = 0.0
    min_dist = float("inf")
    for phi, phi0 in pairs:
        config = kv.ProblemConfig(
            params=apoapsis_params,
            t_start=-t_fall,
            t_end=0.0,
            left=kv.Ray(phi),
            right=kv.Ray(phi0),
            mesh=kv.MeshSpec(n=128, gamma=1.5, levels=3, factor=4),
            solver=kv.SolverSpec(grad_tol=1e-6),
        )
        report = kv.solve(config)
        if min(phi, phi0) == 0.0:
            allowed = {"monotone_decreasing", "monotone_increasing"}
        else:
            allowed = {"monotone_decreasing", "monotone_increasing", "single_minimum"}
        min_dist = min(min_dist, report.min_dist_center, report.min_dist_primary)
        worst_trans = max(worst_trans, report.transversality_left, report.transversality_right)
        if not report.converged:
            failures.append(f"({phi:.2f},{phi0:.2f}) did not converge")
        if report.theta_verdict not in allowed:
            failures.append(f"({phi:.2f},{phi0:.2f}) verdict {report.theta_verdict}")
    elapsed = time.perf_counter() - t0
    ok = not failures and min_dist > 1e-3 and worst_trans < 1e-3 and elapsed < 180.0
    record_acceptance(
        ok,
        f"criterion 6  ray-to-ray arcs: 3 solves, min distance {min_dist:.2f} "
        f"(>1e-3), transversality {worst_trans:.1e} (<1e-3), {elapsed:.1f}s (<180s)",
    )
    assert not failures, failures
    assert min_dist > 1e-3
    assert worst_trans < 1e-3
    assert elapsed < 180.0


# --- criterion 7: every energy class shares the collision exponent ----------


def test_criterion_7_exponent_across_energy_classes():
    t0 = time.perf_counter()
    times = -np.logspace(-6.0, -2.0, 400)
    worst = 0.0
    for energy in (-0.5, 0.0, 0.7):
        arc = kv.KeplerArc(1.0, energy)
        fit = kv.fit_power_law(times, arc.radius(times), (1e-5, 1e-3))
        worst = max(worst, abs(fit.exponent - TWO_THIRDS))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and elapsed < 1.0
    record_acceptance(
        ok,
        f"criterion 7  universal exponent: max |fit - 2/3| = {worst:.1e} "
        f"(<1e-3) across energy classes, {elapsed:.2f}s (<1s)",
    )
    assert worst < 1e-3
    assert elapsed < 1.0


# --- criterion 8: five-arch closure of the rotation extension ----------------


def test_criterion_8_periodic_closure():
    t0 = time.perf_counter()
    psi = -0.8 * math.pi
    solution = kv.build_periodic(
        1.0,
        1.0,
        1.0,
        psi,
        mesh=kv.MeshSpec(n=256, gamma=1.5, levels=2, factor=4),
        solver=kv.SolverSpec(grad_tol=1e-6),
    )
    params = kv.FieldParams(1.0, 1.0, kv.extended_orbit(1.0, 1.0, psi))
    check = kv.closure_check(solution, params)
    el_scale = solution.report.el_residual_max
    jump = max(check.junction_jump_mid, check.junction_jump_end)
    orth = max(check.orthogonality_start, check.orthogonality_mid)
    elapsed = time.perf_counter() - t0
    ok = (
        solution.report.converged
        and check.closure_k == 5
        and check.closure_error is not None
        and check.closure_error < 1e-12
        and jump < 10.0 * el_scale
        and orth < 1e-3
        and elapsed < 120.0
    )
    record_acceptance(
        ok,
        f"criterion 8  periodic closure: k=5, error {check.closure_error:.1e} "
        f"(<1e-12), junction jump {jump:.1e} (<10x EL {el_scale:.1e}), "
        f"orthogonality {orth:.1e} (<1e-3), {elapsed:.1f}s (<120s)",
    )
    assert solution.report.converged
    assert check.closure_k == 5
    assert check.closure_error < 1e-12
    assert jump < 10.0 * el_scale
    assert orth < 1e-3
    assert elapsed < 120.0


# --- criterion 9: reruns are reproducible down to the byte ------------------


def test_criterion_9_byte_identical_reruns(tmp_path):
    t0 = time.perf_counter()
    run = {
        "label": "acceptance-rerun",
        "mu": 1.0,
        "m": 1.0,
        "arc": {"kind": "apoapsis", "radius": 1.0},
        "window": "fall",
        "left": {"ray": 0.75},
        "right": {"ray": 0.25},
        "mesh": {"n": 128, "gamma": 1.5, "levels": 3, "factor": 4},
        "solver": {"grad_tol": 1e-6},
    }
    run_path = tmp_path / "run.json"
    run_path.write_text(json.dumps(run))
    codes = []
    blobs = []
    for sub in ("first", "second"):
        codes.append(main(["solve", "--run", str(run_path), "--out-dir", str(tmp_path / sub)]))
        blobs.append((tmp_path / sub / "acceptance-rerun.csv").read_bytes())
    elapsed = time.perf_counter() - t0
    identical = blobs[0] == blobs[1]
    ok = codes == [0, 0] and identical
    record_acceptance(
        ok,
        f"criterion 9  determinism: repeated solve wrote {len(blobs[0])} "
        f"identical CSV bytes, {elapsed:.1f}s",
    )
    assert codes == [0, 0]
    assert identical
