import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqfree.errors import ConfigurationError, NumericalError
from eqfree.integrators import rk45_adaptive
from eqfree.systems import (
    LinearSystem,
    exact_solution,
    get_system,
    random_stiff_system,
    replace_first,
    slowfast_rhs,
    take_first,
)


class TestSlowFast:
    def test_origin(self):
        np.testing.assert_array_equal(slowfast_rhs(0.0, [0.0, 0.0]), [0.0, 1e5])

    @pytest.mark.parametrize("t", [0.0, 1.3, -2.0])
    def test_fast_equilibrium(self, t):
        u1 = 0.7
        assert slowfast_rhs(t, [u1, math.cos(u1)])[1] == 0.0

    def test_on_manifold_value(self):
        # cos(1)*sin(cos(1)), evaluated independently
        f = slowfast_rhs(0.0, [1.0, math.cos(1.0)])
        assert f[0] == pytest.approx(0.2779289443079115, rel=1e-12)
        assert f[1] == 0.0

    @pytest.mark.parametrize("u2", [-2.0, 0.0, 3.0])
    def test_collapse_onto_manifold(self, u2):
        beta = 1e5
        rhs = lambda t, u: slowfast_rhs(t, u, beta)
        off0 = abs(u2 - math.cos(1.0))
        at3 = rk45_adaptive(rhs, (0, 3 / beta), [1.0, u2], rtol=1e-9, atol=1e-12).u_final
        assert abs(at3[1] - math.cos(at3[0])) == pytest.approx(off0 * math.exp(-3), rel=1e-2)
        t_hit = math.log(off0 / 1e-3) / beta
        u = rk45_adaptive(rhs, (0, 1.01 * t_hit), [1.0, u2], rtol=1e-9, atol=1e-12).u_final
        assert abs(u[1] - math.cos(u[0])) <= 1e-3


def test_restrict_lift_first_component():
    u = np.array([1.0, 2.0, 3.0])
    X = take_first(u)
    np.testing.assert_array_equal(replace_first(X, u), u)
    np.testing.assert_array_equal(replace_first([9.0], u), [9.0, 2.0, 3.0])


class TestRandomStiff:
    def test_no_fast_modes(self):
        sys = random_stiff_system(0, seed=1)
        assert sys.A.shape == (10, 10)
        assert np.max(np.abs(np.linalg.eigvals(sys.A))) <= 0.1 + 1e-12

    @pytest.mark.parametrize("n_fast", [0, 5, 30])
    def test_eigenvalues_match(self, n_fast):
        sys = random_stiff_system(n_fast, seed=7)
        ev = np.sort(np.linalg.eigvalsh((sys.A + sys.A.T) / 2))
        np.testing.assert_allclose(ev, np.sort(sys.eigs), rtol=1e-8, atol=1e-8)
        slow, fast = sys.eigs[:10], sys.eigs[10:]
        assert np.all((-0.1 <= slow) & (slow <= 0.1))
        assert np.all((-20000 <= fast) & (fast <= -10000))

    def test_spectral_gap(self):
        sys = random_stiff_system(20, seed=3)
        assert np.max(np.abs(sys.eigs[:10])) / np.min(np.abs(sys.eigs[10:])) <= 1e-5

    def test_seed_determinism(self):
        a, b = random_stiff_system(8, seed=42), random_stiff_system(8, seed=42)
        assert np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b)

    def test_negative_rejected(self):
        with pytest.raises(ConfigurationError):
            random_stiff_system(-1)

    @settings(max_examples=20, deadline=None)
    @given(n_fast=st.integers(0, 15), seed=st.integers(0, 10**6), data=st.data())
    def test_restrict_lift_round_trip(self, n_fast, seed, data):
        sys = random_stiff_system(n_fast, seed=seed)
        X = np.array(data.draw(st.lists(st.floats(-5, 5), min_size=10, max_size=10)))
        u = sys.lift(X, sys.u0)
        np.testing.assert_allclose(sys.restrict(u), X, atol=1e-10)
        # fast components carried over from the approximation
        Qf = sys.Q[:, 10:]
        np.testing.assert_allclose(Qf.T @ u, Qf.T @ sys.u0, atol=1e-10)


class TestExactSolution:
    def test_initial_value(self):
        sys = random_stiff_system(6, seed=0)
        np.testing.assert_allclose(exact_solution(sys, 0.0), sys.u0, atol=1e-13)

    def test_scalar_decay(self):
        sys = LinearSystem(A=np.array([[-1.0]]), b=np.zeros(1), u0=np.array([2.0]), eigs=np.array([-1.0]),
                           Q=np.eye(1), n_slow=1)
        assert exact_solution(sys, 1.5)[0] == pytest.approx(2 * math.exp(-1.5), rel=1e-14)

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_residual(self, t):
        sys = random_stiff_system(10, seed=5)
        h = 1e-6
        # slow part by central difference; fast part has decayed to round-off
        dudt = (sys.exact(t + h) - sys.exact(t - h)) / (2 * h)
        u = sys.exact(t)
        res = np.linalg.norm(dudt - sys.rhs(t, u))
        scale = np.linalg.norm(sys.A, 2) * np.linalg.norm(u) + np.linalg.norm(sys.b)
        assert res <= 1e-8 * scale

    def test_singular_rejected(self):
        with pytest.raises(NumericalError):
            LinearSystem(A=np.zeros((1, 1)), b=np.zeros(1), u0=np.zeros(1), eigs=np.zeros(1), Q=np.eye(1), n_slow=1)


def test_registry():
    assert get_system("slowfast")()(0.0, np.zeros(2))[1] == 1e5
    with pytest.raises(ConfigurationError):
        get_system("nope")
