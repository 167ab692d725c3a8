import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqfree.errors import ConfigurationError, NonFiniteStateError, StiffnessError
from eqfree.integrators import CountedRhs, Trajectory, end_derivative, rk4_fixed, rk45_adaptive


def decay(t, u):
    return -u


class TestTrajectory:
    def test_single_sample_rejected(self):
        with pytest.raises(ConfigurationError):
            Trajectory([0.0], [[1.0]])

    def test_non_monotone_rejected(self):
        with pytest.raises(ConfigurationError):
            Trajectory([0.0, 1.0, 0.5], np.zeros((3, 1)))

    def test_backwards_times_allowed(self):
        tr = Trajectory([1.0, 0.5, 0.0], np.zeros(3))
        assert tr.states.shape == (3, 1)
        assert tr.t_final == 0.0


def test_counted_rhs_counts_each_call():
    f = CountedRhs(decay)
    for _ in range(7):
        f(0.0, np.ones(2))
    assert f.count == 7
    f.reset()
    assert f.count == 0


def test_counted_rhs_threadsafe():
    f = CountedRhs(lambda t, u: u)
    threads = [threading.Thread(target=lambda: [f(0, 1.0) for _ in range(2000)]) for _ in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert f.count == 8000


class TestRk4Fixed:
    def test_exponential_at_dt_0_1(self):
        tr = rk4_fixed(decay, 0.0, [1.0], 0.1, 10)
        assert abs(tr.u_final[0] - math.exp(-1)) < 1e-6
        assert tr.nfev == 40
        assert len(tr) == 11

    def test_times_exact_grid(self):
        tr = rk4_fixed(decay, 2.0, [1.0], 0.25, 4)
        np.testing.assert_array_equal(tr.times, 2.0 + 0.25 * np.arange(5))

    def test_fourth_order(self):
        errs = [abs(rk4_fixed(decay, 0, [1.0], 1 / n, n).u_final[0] - math.exp(-1)) for n in (10, 20)]
        assert 14 < errs[0] / errs[1] < 18

    def test_zero_dt_rejected(self):
        with pytest.raises(ConfigurationError):
            rk4_fixed(decay, 0, [1.0], 0.0, 3)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_blowup_reports_step(self):
        with pytest.raises(NonFiniteStateError) as info:
            rk4_fixed(lambda t, u: u**2, 0, [1e100], 1.0, 5)
        assert info.value.step >= 1


class TestRk45:
    def test_exponential_rtol_1e_8(self):
        tr = rk45_adaptive(decay, (0, 1), [1.0], rtol=1e-8, atol=1e-12)
        assert abs(tr.u_final[0] - math.exp(-1)) < 1e-7

    def test_hits_final_time_exactly(self):
        tr = rk45_adaptive(decay, (0, 0.7), [1.0])
        assert tr.times[-1] == 0.7

    def test_backward_round_trip(self):
        fwd = rk45_adaptive(decay, (0, 2), [1.0, -0.5], rtol=1e-10, atol=1e-12)
        back = rk45_adaptive(decay, (2, 0), fwd.u_final, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(back.u_final, [1.0, -0.5], atol=1e-8)

    def test_nfev_matches_counter(self):
        f = CountedRhs(decay)
        tr = rk45_adaptive(f, (0, 3), [1.0])
        assert tr.nfev == f.count

    def test_max_step_respected(self):
        tr = rk45_adaptive(decay, (0, 1), [1.0], max_step=0.05)
        assert np.diff(tr.times).max() <= 0.05 + 1e-15

    def test_zero_span_rejected(self):
        with pytest.raises(ConfigurationError):
            rk45_adaptive(decay, (1, 1), [1.0])

    def test_underflow_is_stiffness_error(self):
        # finite-time blowup drives the step size to zero
        with pytest.raises((StiffnessError, NonFiniteStateError)):
            rk45_adaptive(lambda t, u: u**2, (0, 2), [1.0], rtol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(lam=st.floats(0.1, 5.0), u0=st.floats(-3, 3))
    def test_linear_decay_property(self, lam, u0):
        tr = rk45_adaptive(lambda t, u: -lam * u, (0, 1), [u0], rtol=1e-9, atol=1e-12)
        assert abs(tr.u_final[0] - u0 * math.exp(-lam)) < 1e-7 * (1 + abs(u0))


def test_end_derivative_linear():
    tr = Trajectory([0.0, 0.5, 1.0], [[0.0], [1.0], [2.0]])
    np.testing.assert_allclose(end_derivative(tr), [2.0])
