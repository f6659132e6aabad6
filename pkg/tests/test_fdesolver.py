import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradstab.errors import GridError
from gradstab.fdesolver import (
    ForcingSignal,
    Trajectory,
    default_time_grid,
    evolve_forced_mode,
    evolve_homogeneous,
    gradient_norm,
    kernel_antiderivative,
    refine_grid,
    sample_field,
    sample_gradient_field,
    state_norm,
)
from gradstab.mlf import ml1
from gradstab.spectral import (
    FeedbackLaw,
    Mode,
    Polynomial,
    build_sine_1d,
    build_sine_2d,
    closed_loop,
    custom_system,
    project_initial_state,
)
from oracles import duhamel_constant_ref, ml_ref

PI2 = math.pi**2


def benchmark_closed_loop(N=64):
    return closed_loop(build_sine_1d(PI2, N), FeedbackLaw.uniform(N, -math.pi, L_scale=math.pi))


class TestGrid:
    def test_default(self):
        t = default_time_grid(20.0)
        assert t[0] == 0.0 and t[-1] == 20.0
        assert np.all(np.diff(t) > 0)
        assert np.sum(t <= 1.0) == 40
        assert 15.0 in t and 2.0 in t and 6.0 in t

    def test_uniform_early(self):
        t = default_time_grid(2.0, 0.5, geometric_early=False)
        assert list(t) == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_short_horizon(self):
        t = default_time_grid(0.5)
        assert t[-1] == 0.5 and np.all(t <= 0.5)

    def test_refine(self):
        r = refine_grid([1.0, 2.0], 2)
        assert list(r) == [0.0, 0.5, 1.0, 1.5, 2.0]
        with pytest.raises(ValueError):
            refine_grid([0.0, 1.0], 0)


class TestHomogeneous:
    def test_initial_row(self):
        s = build_sine_1d(0.0, 8)
        c = np.arange(1.0, 9.0)
        tr = evolve_homogeneous(s, c, 0.7, [0.0, 0.5, 1.0])
        assert np.array_equal(tr.coeffs[0], c)
        assert np.all(np.isfinite(tr.coeffs))

    def test_matches_series_oracle(self):
        s = build_sine_1d(0.0, 3)
        tr = evolve_homogeneous(s, [1.0, 1.0, 1.0], 0.6, [0.3, 1.0])
        for i, t in enumerate(tr.times):
            for n in range(3):
                if abs(s.eigenvalues[n] * t**0.6) ** (1 / 0.6) > 300:
                    continue
                assert tr.coeffs[i, n] == pytest.approx(ml_ref(0.6, 1.0, s.eigenvalues[n] * t**0.6), rel=1e-11)

    @pytest.mark.parametrize("lam", [-0.5, -PI2, -4 * PI2, -30.0])
    def test_exponential_limit(self, lam):
        s = custom_system([Mode(1, lam, 1.0)])
        t = np.linspace(0, 30.0 / abs(lam), 50)
        tr = evolve_homogeneous(s, [2.5], 1.0, t)
        assert np.allclose(tr.coeffs[:, 0], 2.5 * np.exp(lam * t), rtol=1e-8, atol=0)

    def test_validation(self):
        s = build_sine_1d(0.0, 2)
        with pytest.raises(ValueError):
            evolve_homogeneous(s, [1.0, 1.0], 1.2, [0.0])
        with pytest.raises(ValueError):
            evolve_homogeneous(s, [1.0], 0.5, [0.0])
        with pytest.raises(ValueError):
            evolve_homogeneous(s, [1.0, 1.0], 0.5, [1.0, 0.5])
        with pytest.raises(ValueError):
            evolve_homogeneous(s, [1.0, 1.0], 0.5, [-1.0])

    def test_trajectory_lookup(self):
        s = build_sine_1d(0.0, 2)
        tr = evolve_homogeneous(s, [1.0, 0.0], 0.5, [0.0, 1.0])
        assert tr.at(1.0)[0] == pytest.approx(ml1(0.5, -PI2))
        with pytest.raises(KeyError):
            tr.at(0.5)
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0]), np.array([[np.nan]]), 0.5)

    @pytest.mark.parametrize("q", [0.3, 0.9])
    def test_gradient_decay_bound(self, q):
        # every gamma_n <= -xi, so each mode decays at least as fast as E_q(-xi t^q)
        cl = benchmark_closed_loop(64)
        c0 = project_initial_state(cl, Polynomial([0, 0, -1, 1]))
        t = default_time_grid(20.0)
        g = evolve_homogeneous(cl, c0, q, t).gradient_norms(cl)
        env = np.array([ml1(q, -PI2 * s**q) for s in t])
        assert np.all(g <= g[0] * env * (1 + 1e-12))


class TestForced:
    def test_zero_forcing_equals_homogeneous(self):
        grid = np.linspace(0, 2, 21)
        a = evolve_forced_mode(-PI2, 0.7, 0.3, ForcingSignal.zero(grid), grid)
        s = custom_system([Mode(1, -PI2, 1.0)])
        b = evolve_homogeneous(s, [0.3], 0.7, grid).coeffs[:, 0]
        assert np.array_equal(a, b)

    def test_integrator(self):
        grid = np.linspace(0, 3, 31)
        a = evolve_forced_mode(0.0, 1.0, 0.0, ForcingSignal.constant(grid, 1.0), grid)
        assert np.allclose(a, grid, rtol=1e-14, atol=1e-15)

    def test_kernel_antiderivative(self):
        assert kernel_antiderivative(-1.0, 0.5, 0.0) == 0.0
        # q = 1: int_0^tau exp(lam s) ds
        assert kernel_antiderivative(-2.0, 1.0, 1.5) == pytest.approx(-math.expm1(-3.0) / 2.0, rel=1e-14)

    @pytest.mark.parametrize("q,t", [(0.9, 1.0), (0.5, 0.5)])
    def test_against_quadrature(self, q, t):
        grid = np.array([0.0, t])
        a = evolve_forced_mode(-PI2, q, 0.0, ForcingSignal.constant(grid, 1.0), [t])
        ref = duhamel_constant_ref(-PI2, q, t)
        assert a[0] == pytest.approx(ref, rel=1e-5)

    def test_first_order_convergence_q1(self):
        """q = 1 has the exact solution of a' = lam a + cos t."""
        lam, c0, T = -3.0, 0.4, 2.0

        def exact(t):
            # particular solution A cos t + B sin t
            A = -lam / (lam * lam + 1.0)
            B = 1.0 / (lam * lam + 1.0)
            part = A * np.cos(t) + B * np.sin(t)
            return (c0 - A) * np.exp(lam * t) + part

        errs = []
        for n in (20, 40, 80, 160):
            grid = np.linspace(0, T, n + 1)
            a = evolve_forced_mode(lam, 1.0, c0, ForcingSignal.from_function(np.cos, grid), [T])
            errs.append(abs(a[0] - exact(T)))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 0.9)

    @pytest.mark.parametrize("q", [0.5, 0.8])
    def test_refinement_order(self, q):
        lam, T = -PI2, 1.0
        vals = []
        for n in (10, 20, 40, 80):
            grid = np.linspace(0, T, n + 1)
            f = ForcingSignal.from_function(lambda s: np.sin(2 * s) + 1.0, grid)
            vals.append(evolve_forced_mode(lam, q, 0.2, f, [T])[0])
        d = np.abs(np.diff(vals))
        orders = np.log2(d[:-1] / d[1:])
        assert np.all(orders >= 0.9)

    def test_grid_errors(self):
        grid = np.linspace(0, 1, 11)
        f = ForcingSignal.constant(grid, 1.0)
        with pytest.raises(GridError):
            evolve_forced_mode(-1.0, 0.5, 0.0, f, [0.55])
        with pytest.raises(GridError):
            evolve_forced_mode(-1.0, 0.5, 0.0, ForcingSignal.constant(grid + 0.1, 1.0), [0.6])

    def test_forcing_validation(self):
        with pytest.raises(ValueError):
            ForcingSignal(np.array([0.0]), np.array([]))
        with pytest.raises(ValueError):
            ForcingSignal(np.array([0.0, 1.0]), np.array([1.0, 2.0]))


class TestNorms:
    def test_examples(self):
        s = build_sine_1d(0.0, 5)
        assert state_norm(s, [0, 0, 1, 0, 0]) == 1.0
        assert state_norm(s, np.zeros(5)) == 0.0
        assert state_norm(s, [3, 4, 0, 0, 0]) == 5.0
        assert gradient_norm(s, np.zeros(5)) == 0.0
        for n in range(1, 6):
            e = np.zeros(5)
            e[n - 1] = 1.0
            assert gradient_norm(s, e) == pytest.approx(n * math.pi, rel=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=6, max_size=6))
    def test_parseval(self, c):
        s = build_sine_1d(0.0, 6)
        assert state_norm(s, c) ** 2 == pytest.approx(math.fsum(x * x for x in c), rel=1e-14, abs=1e-300)

    def test_benchmark_initial_gradient(self):
        s = build_sine_1d(PI2, 64)
        c = project_initial_state(s, Polynomial([0, 0, -1, 1]))
        # the tail beyond 64 modes is about 2e-6 relative; see the acceptance test
        assert gradient_norm(s, c) == pytest.approx(math.sqrt(2 / 15), rel=1e-5)
        s = build_sine_1d(PI2, 400)
        c = project_initial_state(s, Polynomial([0, 0, -1, 1]))
        assert gradient_norm(s, c) == pytest.approx(math.sqrt(2 / 15), rel=1e-7)

    def test_full_gram(self):
        modes = [Mode(1, -1.0, 2.0), Mode(2, -2.0, 3.0)]
        s = custom_system(modes, [[2.0, 1.0], [1.0, 3.0]])
        a = np.array([1.0, -1.0])
        assert gradient_norm(s, a) == pytest.approx(math.sqrt(2 - 2 + 3), rel=1e-15)

    def test_2d_gradient_norm(self):
        s = build_sine_2d(2)
        a = np.ones(s.N)
        assert gradient_norm(s, a) == pytest.approx(math.sqrt(np.sum(s.grad_sq_norms)))


class TestSampling:
    def test_mode_value(self):
        s = build_sine_1d(0.0, 3)
        assert sample_field(s, [1, 0, 0], [0.5])[0] == pytest.approx(math.sqrt(2), rel=1e-15)
        assert np.allclose(sample_field(s, [1.0, 2.0, 3.0], [0.0, 1.0]), 0.0, atol=1e-14)

    def test_reconstruction(self):
        s = build_sine_1d(PI2, 64)
        c = project_initial_state(s, Polynomial([0, 0, -1, 1]))
        x = np.linspace(0, 1, 101)
        assert np.max(np.abs(sample_field(s, c, x) - (x**3 - x**2))) <= 1e-3
        interior = x[5:-5]
        assert np.max(np.abs(sample_gradient_field(s, c, interior) - (3 * interior**2 - 2 * interior))) <= 5e-2

    def test_2d_shapes(self):
        s = build_sine_2d(2)
        pts = np.array([[0.5, 0.5], [0.25, 0.75], [0.0, 0.3]])
        a = np.zeros(s.N)
        a[0] = 1.0
        v = sample_field(s, a, pts)
        g = sample_gradient_field(s, a, pts)
        assert v.shape == (3,) and g.shape == (3, 2)
        assert v[0] == pytest.approx(2.0) and v[2] == pytest.approx(0.0, abs=1e-15)
        assert np.allclose(g[0], 0.0, atol=1e-14)
