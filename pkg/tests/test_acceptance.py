"""Acceptance gate: one test and one printed PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest

from gradstab.fdesolver import ForcingSignal, default_time_grid, evolve_forced_mode, gradient_norm
from gradstab.mlf import ml1, ml1_neg_bounds
from gradstab.spectral import (
    FeedbackLaw,
    Polynomial,
    VerdictKind,
    build_sine_1d,
    build_sine_2d,
    classify_stability,
    closed_loop,
    decompose,
    project_initial_state,
)
from gradstab.stabilizer import (
    REFERENCE_TABLE1,
    TABLE1_Q,
    ExperimentSpec,
    benchmark_feedback,
    benchmark_system,
    run_algorithm,
    run_decomposition_feedback,
    table1_experiment,
)
from oracles import duhamel_constant_ref

PI2 = math.pi**2
Y0 = Polynomial([0, 0, -1, 1])


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def test_01_sandwich_bounds(report):
    rng = np.random.default_rng(20240601)
    q = rng.uniform(0.05, 0.95, 10_000)
    t = 10.0 ** rng.uniform(-3.0, 3.0, 10_000)
    start = time.perf_counter()
    bad = 0
    for qi, ti in zip(q, t):
        lo, hi = ml1_neg_bounds(qi, ti)
        v = ml1(qi, -(ti**qi))
        if not (lo - 1e-10 <= v <= hi + 1e-10):
            bad += 1
    elapsed = time.perf_counter() - start
    report(1, bad == 0 and elapsed < 5.0, f"sandwich bounds: {bad} violations in 10^4 samples, {elapsed:.2f} s (limit 5 s)")


def test_02_exponential_reduction(report):
    z = np.linspace(-30.0, 5.0, 100)
    worst = max(abs(ml1(1.0, zi) - math.exp(zi)) / math.exp(zi) for zi in z)
    report(2, worst <= 1e-10, f"E_1(z) vs exp(z) on [-30, 5]: max relative error {worst:.2e} (limit 1e-10)")


def test_03_monotone_decay(report):
    t = np.geomspace(1e-3, 1e3, 1000)
    worst = -math.inf
    for q in np.round(np.arange(0.1, 1.0, 0.1), 10):
        v = np.array([ml1(q, -(s**q)) for s in t])
        worst = max(worst, float(np.max(np.diff(v))))
    report(3, worst <= 1e-12, f"t -> E_q(-t^q) nonincreasing for q = 0.1..0.9: max increment {worst:.2e} (slack 1e-12)")


def test_04_closed_loop_spectrum(report):
    cl = closed_loop(benchmark_system(64), FeedbackLaw.uniform(64, -math.pi, L_scale=math.pi))
    n = np.arange(1, 65)
    exact = bool(np.all(cl.eigenvalues == -(n**2) * PI2))
    report(4, exact, f"gamma_n == -n^2 pi^2 exactly for n <= 64: {exact}")


def test_05_classifier_verdicts(report):
    v2d = classify_stability(build_sine_2d(16))
    vopen = classify_stability(benchmark_system(64))
    vcl = classify_stability(closed_loop(benchmark_system(64), benchmark_feedback(64)))
    ok = (
        v2d.kind is VerdictKind.MITTAG_LEFFLER_STABLE
        and v2d.xi == 4 * PI2
        and vopen.kind is VerdictKind.CRITERIA_NOT_SATISFIED
        and vopen.witness == 0.0
        and vcl.kind is VerdictKind.MITTAG_LEFFLER_STABLE
        and vcl.xi == PI2
    )
    report(
        5,
        ok,
        f"2D: {v2d.kind.value} xi={v2d.xi:.12g}; open loop: {vopen.kind.value} witness={vopen.witness}; "
        f"closed loop: {vcl.kind.value} xi={vcl.xi:.12g}",
    )


def test_06_table1_property(report):
    start = time.perf_counter()
    rows = table1_experiment(ExperimentSpec())
    elapsed = time.perf_counter() - start
    system = benchmark_system(64)
    g0 = gradient_norm(system, project_initial_state(system, Y0))
    errs = dict(rows)
    decreasing = all(a > b for (_, a), (_, b) in zip(rows, rows[1:]))
    r09, r01 = errs[0.9] / g0, errs[0.1] / g0
    side = ", ".join(f"q={q}: {e:.4e} (ref {REFERENCE_TABLE1[q]:.4g})" for q, e in rows)
    ok = [q for q, _ in rows] == list(TABLE1_Q) and decreasing and r09 < 1e-2 and r01 > 1e-1 and elapsed < 10.0
    report(
        6,
        ok,
        f"strictly decreasing={decreasing}; q=0.9 error/||grad y0|| = {r09:.3e} (< 1e-2); "
        f"q=0.1 error/||grad y0|| = {r01:.3e} (> 1e-1); {elapsed:.2f} s; {side}",
    )


def test_07_algorithm_termination(report):
    s, fb = benchmark_system(64), benchmark_feedback(64)
    probe = run_algorithm(s, fb, Y0, 0.9, 1.0)
    t = probe.trajectory.times
    i15 = int(np.flatnonzero(t == 15.0)[0])
    eps = 1.05 * probe.gradient_norms[i15]
    r = run_algorithm(s, fb, Y0, 0.9, eps)
    ok = r.terminated and r.t_hit is not None and r.t_hit <= 15.1
    report(7, ok, f"epsilon = 1.05 x ||grad y(15)|| = {eps:.4e}: terminated={r.terminated}, t_hit={r.t_hit}")


def test_08_duhamel_oracle(report):
    worst = 0.0
    for q in (0.5, 0.9):
        for t in (0.5, 1.0, 2.0):
            grid = np.array([0.0, t])
            a = evolve_forced_mode(-PI2, q, 0.0, ForcingSignal.constant(grid, 1.0), [t])[0]
            ref = duhamel_constant_ref(-PI2, q, t)
            worst = max(worst, abs(a - ref) / abs(ref))
    report(8, worst <= 1e-5, f"exact-kernel Duhamel vs graded-mesh quadrature: max relative error {worst:.2e} (limit 1e-5)")


def test_09_decomposition_equivalence(report):
    s = benchmark_system(64)
    times = default_time_grid(20.0)
    d = decompose(s, 3 * PI2)
    split = run_decomposition_feedback(d, [-PI2], 1.0, Y0, 0.9, times)
    direct = run_algorithm(s, FeedbackLaw.unstable_only(64, [-PI2]), Y0, 0.9, 5e-3, times)
    a, b = split.trajectory.coeffs, direct.trajectory.coeffs
    nz = b != 0
    worst = float(np.max(np.abs(a[nz] - b[nz]) / np.abs(b[nz])))
    exact_zeros = bool(np.all(a[~nz] == 0))
    report(9, worst <= 1e-5 and exact_zeros, f"two-subsystem vs diagonal closed loop on t in [0, 20]: max relative error {worst:.2e} (limit 1e-5)")


def test_10_heat_equation_limit(report):
    cl = closed_loop(benchmark_system(64), benchmark_feedback(64))
    c0 = project_initial_state(cl, Y0)
    times = default_time_grid(20.0)
    r = run_algorithm(benchmark_system(64), benchmark_feedback(64), Y0, 1.0, 1e-300, times)
    worst = 0.0
    for i, t in enumerate(times):
        for n, g in enumerate(cl.eigenvalues):
            if g * t >= -30.0:
                ref = c0[n] * math.exp(g * t)
                worst = max(worst, abs(r.trajectory.coeffs[i, n] - ref) / abs(ref))
    report(10, worst <= 1e-8, f"q = 1 coefficients vs c_n exp(gamma_n t) where gamma_n t >= -30: max relative error {worst:.2e} (limit 1e-8)")


def test_11_gradient_norm_cross_check(report):
    s = build_sine_1d(PI2, 64)
    spectral = gradient_norm(s, project_initial_state(s, Y0))
    direct = math.sqrt(2.0 / 15.0)
    rel = abs(spectral - direct) / direct
    report(11, rel <= 1e-6, f"||grad y0|| spectral (N=64) {spectral:.10f} vs sqrt(2/15) {direct:.10f}: relative error {rel:.3e} (limit 1e-6)")
