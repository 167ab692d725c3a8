"""Projective integration: PIG, PIRK2 and PIRK4.

A *burst* is any callable ``burst(t0, u0, duration) -> Trajectory`` that
simulates the micro-scale model from ``(t0, u0)`` to ``t0 + duration``.
Macro-scale states are obtained from micro states with ``restrict`` and
turned back into micro states with ``lift(X, u_approx)``, where
``u_approx`` is the final micro state of the most recent burst.
"""

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import ConfigurationError, NonFiniteStateError, NumericalError, StabilityError
from .integrators import Trajectory, end_derivative, rk4_fixed, rk45_adaptive

DIVERGENCE_NORM = 1e12


def identity_restrict(u):
    return np.array(u, dtype=float)


def identity_lift(X, u_approx):
    return np.array(X, dtype=float)


@dataclass
class PiConfig:
    burst_length: float
    macro_step: float = None
    record_bursts: bool = False
    record_svf: bool = False

    def __post_init__(self):
        if not self.burst_length > 0:
            raise ConfigurationError("burst length must be positive")
        if self.macro_step is not None and not abs(self.macro_step) > self.burst_length:
            raise ConfigurationError("macro step must exceed the burst length")


@dataclass
class PiResult:
    """Output of a projective integration run.

    ``macro_states[i]`` is the macro state at ``macro_times[i]``. ``bursts``
    holds every micro trajectory when recording was requested, and
    ``svf_times``/``svf_dX`` the slow vector field estimates.
    """

    macro_times: np.ndarray
    macro_states: np.ndarray
    bursts: list = None
    svf_times: np.ndarray = None
    svf_dX: np.ndarray = None
    nfev: int = 0
    n_bursts: int = 0

    @property
    def T(self):
        return self.macro_times

    @property
    def X(self):
        return self.macro_states

    def micro_data(self):
        """Concatenated burst samples, NaN rows between bursts."""
        if not self.bursts:
            return np.empty(0), np.empty((0, 0))
        n = self.bursts[0].states.shape[1]
        ts, xs = [], []
        for b in self.bursts:
            ts.extend([b.times, [np.nan]])
            xs.extend([b.states, np.full((1, n), np.nan)])
        return np.concatenate(ts[:-1]), np.vstack(xs[:-1])


class _Recorder:
    """Collects bursts, svf samples and evaluation counts during a run."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.bursts = [] if cfg.record_bursts else None
        self.svf_t = []
        self.svf_dx = []
        self.nfev = 0
        self.n_bursts = 0

    def burst(self, traj):
        self.nfev += traj.nfev
        self.n_bursts += 1
        if self.bursts is not None:
            self.bursts.append(traj)

    def svf(self, t, dX):
        if self.cfg.record_svf:
            self.svf_t.append(t)
            self.svf_dx.append(np.array(dX, dtype=float))

    def result(self, times, states):
        res = PiResult(
            macro_times=np.asarray(times, dtype=float),
            macro_states=np.atleast_2d(np.asarray(states, dtype=float)),
            bursts=self.bursts,
            nfev=self.nfev,
            n_bursts=self.n_bursts,
        )
        if self.cfg.record_svf:
            res.svf_times = np.asarray(self.svf_t, dtype=float)
            res.svf_dX = np.asarray(self.svf_dx, dtype=float).reshape(len(self.svf_t), -1)
        return res


def _check_state(u, t, what="state"):
    if not np.all(np.isfinite(u)):
        raise StabilityError(
            f"non-finite {what} at t={t:g}; the burst is probably too short for the projective step "
            "(need burst >~ log(beta*Delta)/beta)",
            time=t,
        )
    if np.linalg.norm(u) > DIVERGENCE_NORM:
        raise StabilityError(
            f"{what} norm exceeded {DIVERGENCE_NORM:g} at t={t:g}; projective integration is unstable, "
            "lengthen the burst to >~ log(beta*Delta)/beta",
            time=t,
        )


def _run_burst(burst, t0, u0, duration):
    traj = burst(t0, u0, duration)
    if not isinstance(traj, Trajectory):
        traj = Trajectory(*traj)
    return traj


def rk4_burst(rhs, max_dt):
    """Burst engine: fixed-step RK4 with steps no longer than ``max_dt``."""

    def burst(t0, u0, duration):
        n = max(1, math.ceil(abs(duration) / max_dt - 1e-9))
        return rk4_fixed(rhs, t0, u0, duration / n, n)

    return burst


def rk45_burst(rhs, rtol=1e-6, atol=1e-9):
    """Burst engine: adaptive Dormand--Prince."""

    def burst(t0, u0, duration):
        return rk45_adaptive(rhs, (t0, t0 + duration), u0, rtol=rtol, atol=atol)

    return burst


def constr_deriv(burst, t0, u0, delta):
    """Slow time derivative at ``t0`` by the constraint-defined manifold.

    Burst forward from ``(t0, u0)``, extrapolate back by ``2*delta`` to
    ``t0 - delta`` and burst again; the end derivative of the second burst
    estimates the slow vector field at ``t0``.

    Returns ``(dudt, (first_burst, second_burst))``.
    """
    if not delta > 0:
        raise ConfigurationError("burst length must be positive")
    first = _run_burst(burst, t0, u0, delta)
    slope = end_derivative(first)
    v0 = first.states[-1] - 2 * delta * slope
    if not np.all(np.isfinite(v0)):
        raise StabilityError(
            f"backward projection produced a non-finite state at t={t0:g}; try a smaller burst", time=t0
        )
    second = _run_burst(burst, t0 - delta, v0, delta)
    return end_derivative(second), (first, second)


def default_macro(rtol=1e-6, atol=1e-9):
    return partial(rk45_adaptive, rtol=rtol, atol=atol)


def pig(macro, burst, tspan, u0, restrict=None, lift=None, cfg=None, delta=None):
    """Projective integration with a general macro integrator.

    ``macro(f, tspan, X0)`` is any integrator returning a
    :class:`Trajectory`; it is handed the derivative field
    ``F(t, X) = d/dt restrict(u)`` estimated by :func:`constr_deriv` from
    the micro state ``lift(X, u_prev)``.
    """
    if cfg is None:
        cfg = PiConfig(burst_length=delta)
    restrict = restrict or identity_restrict
    lift = lift or identity_lift
    if macro is None:
        macro = default_macro()
    delta = cfg.burst_length
    rec = _Recorder(cfg)
    u_prev = np.array(u0, dtype=float).ravel()
    X0 = np.atleast_1d(np.asarray(restrict(u_prev), dtype=float))
    T0, T1 = float(tspan[0]), float(tspan[1])
    if T0 == T1:
        return rec.result([T0], [X0])

    state = {"u_prev": u_prev, "t": T0, "X": X0}
    partial_times, partial_states = [T0], [X0]

    def F(t, X):
        u = lift(X, state["u_prev"])
        _check_state(u, t, "lifted state")
        _, (first, second) = constr_deriv(burst, t, u, delta)
        rec.burst(first)
        rec.burst(second)
        state["u_prev"] = second.u_final
        _check_state(state["u_prev"], t, "micro state")
        Xs = np.array([np.atleast_1d(restrict(second.states[-2])), np.atleast_1d(restrict(second.states[-1]))])
        dX = end_derivative(Trajectory(second.times[-2:], Xs))
        rec.svf(t, dX)
        partial_times.append(t)
        partial_states.append(np.asarray(X, dtype=float))
        return dX

    try:
        traj = macro(F, (T0, T1), X0)
    except (StabilityError, NumericalError) as exc:
        reached = partial_times[-1]
        part = rec.result(partial_times, partial_states)
        raise StabilityError(f"projective integration failed near t={reached:g}: {exc}", time=reached, partial=part) from exc
    return rec.result(traj.times, traj.states)


# Butcher tableaus (A, b, c) of the macro Runge--Kutta steps
HEUN = ([[], [1.0]], [0.5, 0.5], [0.0, 1.0])
RK4 = ([[], [0.5], [0.0, 0.5], [0.0, 0.0, 1.0]], [1 / 6, 1 / 3, 1 / 3, 1 / 6], [0.0, 0.5, 0.5, 1.0])


def _pirk(tableau, burst, macro_times, u0, restrict, lift, cfg):
    A, b, c = tableau
    restrict = restrict or identity_restrict
    lift = lift or identity_lift
    delta = cfg.burst_length
    times = np.asarray(macro_times, dtype=float)
    if times.ndim != 1 or len(times) < 1:
        raise ConfigurationError("macro_times must be a 1-D sequence")
    gaps = np.diff(times)
    if len(gaps) and not (np.all(gaps > 0) or np.all(gaps < 0)):
        raise ConfigurationError("macro_times must be strictly monotone")
    if np.any(np.abs(gaps) <= delta):
        raise ConfigurationError("every macro step must exceed the burst length")

    rec = _Recorder(cfg)
    u_prev = np.array(u0, dtype=float).ravel()
    X = np.atleast_1d(np.asarray(restrict(u_prev), dtype=float))
    out = [X]

    def stage(t, Xs):
        nonlocal u_prev
        u = lift(Xs, u_prev)
        _check_state(u, t, "lifted state")
        traj = _run_burst(burst, t, u, delta)
        rec.burst(traj)
        u_prev = traj.u_final
        _check_state(u_prev, t + delta, "micro state")
        Xr = np.array([np.atleast_1d(restrict(traj.states[-2])), np.atleast_1d(restrict(traj.states[-1]))])
        k = end_derivative(Trajectory(traj.times[-2:], Xr))
        rec.svf(t + delta, k)
        return Xr[-1], k

    try:
        for n, Delta in enumerate(gaps):
            Tn = times[n]
            h = Delta - delta
            # stage i starts its burst at Tn + c_i h so that it ends, and its
            # derivative is sampled, at the stage node Tn + delta + c_i h
            W, k1 = stage(Tn, X)
            ks = [k1]
            for i in range(1, len(b)):
                slope = sum(a * k for a, k in zip(A[i], ks)) / c[i]
                _, ki = stage(Tn + c[i] * h, W + (c[i] * h - delta) * slope)
                ks.append(ki)
            X = W + h * sum(bi * k for bi, k in zip(b, ks))
            _check_state(X, Tn + Delta, "macro state")
            out.append(X)
    except StabilityError as exc:
        exc.partial = rec.result(times[: len(out)], out)
        raise
    except NonFiniteStateError as exc:
        raise StabilityError(str(exc), time=exc.time, partial=rec.result(times[: len(out)], out)) from exc
    return rec.result(times, out)


def pirk2(burst, macro_times, u0, restrict=None, lift=None, cfg=None, delta=None):
    """Second-order projective Runge--Kutta on the given macro grid."""
    cfg = cfg or PiConfig(burst_length=delta)
    return _pirk(HEUN, burst, macro_times, u0, restrict, lift, cfg)


def pirk4(burst, macro_times, u0, restrict=None, lift=None, cfg=None, delta=None):
    """Fourth-order projective Runge--Kutta on the given macro grid."""
    cfg = cfg or PiConfig(burst_length=delta)
    return _pirk(RK4, burst, macro_times, u0, restrict, lift, cfg)


@dataclass(frozen=True)
class BurstLength:
    value: float
    beneficial: bool

    def __float__(self):
        return self.value


def burst_length_min(beta, Delta):
    """Shortest stable burst, log(beta*Delta)/beta.

    When ``beta*Delta <= 1`` projection gains nothing; the returned length is
    then zero with ``beneficial=False``.
    """
    if not beta > 0:
        raise ConfigurationError("beta must be positive")
    bD = beta * abs(Delta)
    if bD <= 1:
        return BurstLength(0.0, False)
    return BurstLength(math.log(bD) / beta, True)


def suggest_macro_step(alpha, eps, order):
    """Macro step meeting accuracy ``eps`` for slow rate ``alpha``."""
    if not alpha > 0:
        raise ConfigurationError("alpha must be positive")
    if not 0 < eps < 1:
        raise ConfigurationError("eps must lie in (0, 1)")
    if order == 2:
        return math.sqrt(6 * eps) / alpha
    if order == 4:
        return eps**0.25 / alpha
    raise ConfigurationError("order must be 2 or 4")
