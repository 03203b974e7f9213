"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output capture is on).
"""

import math
import time

import mpmath
import numpy as np
import pytest

from switchrate import (
    IntegratorConfig,
    PolynomialForm,
    Subsystem,
    SwitchedSystem,
    check_weak_lyapunov,
    compute_M,
    compute_nonlinear_certificate,
    generate_chaotic_like,
    generate_dwell_time,
    generate_regular,
    is_hurwitz,
    m_delta_curve,
    matrix_exponential,
    simulate_switched,
    slow_convergence_demo,
    verify_average_dwell_time,
    verify_dwell_time,
    verify_homogeneous_bound,
    verify_nonlinear_bound,
    verify_persistent_dwell_time,
    verify_switching_instants,
)
from switchrate.catalog import B1, B2, cubic_damping_system, example_system

from conftest import random_weak_system


@pytest.fixture
def emit(capsys):
    def _emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail

    return _emit


def test_criterion_1_hypotheses(emit):
    t0 = time.perf_counter()
    h1, h2 = is_hurwitz(B1), is_hurwitz(B2)
    avg = is_hurwitz(0.5 * (B1 + B2))
    reports = check_weak_lyapunov(example_system(), sphere_samples=4096)
    worst = max(r.worst_value for r in reports)
    elapsed = time.perf_counter() - t0
    ok = (
        h1.is_hurwitz and h2.is_hurwitz
        and abs(h1.abscissa + 0.5) <= 1e-9 and abs(h2.abscissa + 0.5) <= 1e-9
        and not avg.is_hurwitz and avg.abscissa == 0.0
        and all(r.holds for r in reports) and worst <= 1e-9
        and elapsed < 1.0
    )
    emit(1, ok, f"abscissae {h1.abscissa:.12g}, {h2.abscissa:.12g}; average {avg.abscissa!r}; "
                f"worst L_f V {worst:.3g}; {elapsed:.2f}s")


def test_criterion_2_sphere_search_matches_exact(emit):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    systems = [example_system()] + [random_weak_system(rng, 2 if k % 2 else 3) for k in range(20)]
    worst = 0.0
    all_hurwitz = True
    for sys in systems:
        all_hurwitz &= all(is_hurwitz(s.matrix).is_hurwitz for s in sys.subsystems)
        for delta in (0.25, 1.0, 4.0):
            exact = compute_M(sys, delta, method="exact").M
            sphere = compute_M(sys, delta, method="sphere", samples=4096, refine_iters=50).M
            worst = max(worst, abs(sphere - exact) / exact)
    elapsed = time.perf_counter() - t0
    ok = all_hurwitz and worst <= 1e-4 and elapsed < 30.0
    emit(2, ok, f"{len(systems)} systems x 3 deltas, max relative gap {worst:.2e}; {elapsed:.2f}s")


def test_criterion_3_m_curve(emit):
    t0 = time.perf_counter()
    deltas = np.geomspace(0.05, 10.0, 50)
    curve = m_delta_curve(example_system(), deltas)
    v = curve.values
    elapsed = time.perf_counter() - t0
    ok = (
        np.all((v > 0) & (v < 1))
        and np.all(np.diff(v) <= 1e-9)
        and curve.monotone
        and v[0] > 0.9
        and elapsed < 10.0
    )
    emit(3, ok, f"M(0.05) = {v[0]:.8f}, M(1) ~ {np.interp(1.0, deltas, v):.6f}, M(10) = {v[-1]:.3e}; "
                f"monotone {curve.monotone}; {elapsed:.2f}s")


def test_criterion_4_beta_monte_carlo(emit):
    t0 = time.perf_counter()
    sys = example_system()
    cert = compute_M(sys, 1.0)
    rep = verify_homogeneous_bound(sys, cert, trials=1000, horizon_mult=20.0, seed=0, rel_tol=1e-8)
    inst = verify_switching_instants(sys, cert, trials=200, periods=20, seed=1, rel_tol=1e-8)
    elapsed = time.perf_counter() - t0
    ok = rep.violations == 0 and inst.violations == 0 and elapsed < 60.0
    emit(4, ok, f"{rep.trials} trials, {rep.violations} violations, max ratio {rep.max_ratio:.6f}; "
                f"switching instants {inst.violations} violations (max {inst.max_ratio:.6f}); "
                f"{elapsed:.2f}s")


def test_criterion_5_slow_convergence(emit):
    t0 = time.perf_counter()
    sys = example_system()
    # constancy intervals of 0.005 alternate 1, 2: period 0.01
    u = generate_regular(2, 0.005, 25.0)
    traj = simulate_switched(sys, u, [1.0, 0.0], horizon=10.0, record_dt=0.5)
    norm10 = float(np.linalg.norm(traj.final_state))
    rows = slow_convergence_demo(sys, u, [1.0, 0.0], [1, 2, 5, 10, 20])
    times = [r.time_to_half for r in rows]
    elapsed = time.perf_counter() - t0
    ok = norm10 >= 0.9 and bool(np.all(np.diff(times) > 0)) and elapsed < 30.0
    table = ", ".join(f"T={r.T:g}: {r.time_to_half:.4f}" for r in rows)
    emit(5, ok, f"|x(10)| = {norm10:.6f}; time to half V: {table}; {elapsed:.2f}s")


def test_criterion_6_nonlinear_certificate(emit):
    t0 = time.perf_counter()
    sys = cubic_damping_system()
    cert = compute_nonlinear_certificate(sys, 1.0, 4.0)
    rep = verify_nonlinear_bound(sys, cert, trials=500, seed=0)
    V = PolynomialForm.from_quadratic(np.eye(2))
    decay = SwitchedSystem((Subsystem.polynomial(-np.eye(2)),), V)
    lin = compute_nonlinear_certificate(decay, 1.0, 1.0)
    elapsed = time.perf_counter() - t0
    ok = (
        cert.m < 1
        and cert.m1 == (1 + cert.m) / 2
        and cert.m2 < 1
        and cert.alpha > 4
        and cert.gamma > 0
        and rep.violations == 0
        and abs(lin.m - math.exp(-1.0)) <= 1e-10
        and elapsed < 120.0
    )
    emit(6, ok, f"m={cert.m:.6f} m1={cert.m1:.6f} r1={cert.r1:.4f} r={cert.r:.4f} m2={cert.m2:.6f} "
                f"alpha={cert.alpha:.4f} gamma={cert.gamma:.6f}; {rep.trials} trials, "
                f"{rep.violations} violations (max ratio {rep.max_ratio:.4f}); "
                f"f=-x: |m - e^-1| = {abs(lin.m - math.exp(-1.0)):.1e}; {elapsed:.2f}s")


def _taylor30(A):
    with mpmath.workdps(50):
        M = mpmath.matrix(A.tolist())
        term = mpmath.eye(A.shape[0])
        acc = mpmath.eye(A.shape[0])
        for k in range(1, 31):
            term = term * M / k
            acc += term
        return np.array(acc.tolist(), dtype=float)


def test_criterion_7_integrators(emit):
    sys = example_system()
    u = generate_regular(2, 1.0, 4.0)
    x0 = [1.0, 0.0]
    exact = simulate_switched(sys, u, x0, record_dt=1.0).final_state
    errs = []
    # steps that divide the record interval, so halving h halves the step used
    for h in (0.2, 0.1, 0.05):
        rk = simulate_switched(sys, u, x0, record_dt=1.0, cfg=IntegratorConfig(method="rk4", step=h))
        errs.append(float(np.linalg.norm(rk.final_state - exact)))
    ratios = [errs[k] / errs[k + 1] for k in range(len(errs) - 1)]
    order_ok = all(16 * 0.7 <= r <= 16 * 1.3 for r in ratios)

    rng = np.random.default_rng(7)
    worst = 0.0
    mats = [B1, B2, -np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]])]
    mats += [rng.standard_normal((d, d)) for d in (2, 3, 3, 4)]
    for B in mats:
        for target in (0.1, 1.0, 2.5, 5.0):
            delta = target / np.linalg.norm(B, 2)
            diff = np.max(np.abs(matrix_exponential(B, delta) - _taylor30(delta * B)))
            worst = max(worst, diff)
    ok = order_ok and worst <= 1e-12
    emit(7, ok, f"RK4 errors {', '.join(f'{e:.3e}' for e in errs)} (ratios "
                f"{', '.join(f'{r:.2f}' for r in ratios)}); expm vs order-30 Taylor max diff {worst:.2e}")


def test_criterion_8_signal_hierarchy(emit):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    failures = 0
    for k in range(200):
        p = int(rng.integers(1, 5))
        delta = float(rng.uniform(0.1, 2.0))
        law = "uniform" if k % 2 else "round-robin"
        u = generate_dwell_time(int(rng.integers(2**31)), p, delta, 30.0, law=law)
        if not (verify_dwell_time(u, delta).ok
                and verify_average_dwell_time(u, delta, 1).ok
                and verify_persistent_dwell_time(u, delta, u.horizon).ok):
            failures += 1
    chaotic_bad = 0
    checked = 0
    for q in (0.5, 0.3, 0.8):
        for K in range(1, 6):
            u = generate_chaotic_like(3, 1.0, K + 1.0, q)
            longest = float(np.max(u.constancy_lengths()[u.switch_times >= K]))
            assert longest <= q**K + 1e-15
            for factor in (1.0 + 1e-9, 1.01, 2.0, 10.0, 1e3):
                checked += 1
                if verify_dwell_time(u, q**K * factor).ok:
                    chaotic_bad += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and chaotic_bad == 0
    emit(8, ok, f"200 dwell signals, {failures} hierarchy failures; chaotic-like: {chaotic_bad} of "
                f"{checked} dwell checks above the window length passed; {elapsed:.2f}s")
