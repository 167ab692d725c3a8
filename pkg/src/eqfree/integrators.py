"""Reference ODE steppers.

These serve two roles: as the micro-scale engine inside simulation bursts,
and as the (adaptive) macro-scale integrator driven by :func:`eqfree.pig`.
"""

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NonFiniteStateError, NumericalError, StiffnessError

EPS = np.finfo(float).eps


@dataclass
class Trajectory:
    """Ordered ``(time, state)`` samples from one burst or run.

    ``states`` is an ``(M+1, n)`` array; ``nfev`` counts right-hand-side
    evaluations spent producing the samples (when known).
    """

    times: np.ndarray
    states: np.ndarray
    nfev: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        self.states = states
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ConfigurationError("times and states must have matching length")
        if len(self.times) < 2:
            raise ConfigurationError("a trajectory needs at least two samples")
        steps = np.diff(self.times)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigurationError("trajectory times must be strictly monotone")

    def __len__(self):
        return len(self.times)

    @property
    def t_final(self):
        return float(self.times[-1])

    @property
    def u_final(self):
        return self.states[-1].copy()


class CountedRhs:
    """Wrap ``f(t, u)`` and count how often it is evaluated.

    The counter is guarded by a lock so a shared instance stays exact when
    several threads integrate with it.
    """

    def __init__(self, fun):
        self.fun = fun
        self._count = 0
        self._lock = threading.Lock()

    def __call__(self, t, u):
        with self._lock:
            self._count += 1
        return self.fun(t, u)

    @property
    def count(self):
        return self._count

    def reset(self):
        with self._lock:
            self._count = 0


def rk4_fixed(rhs, t0, u0, dt, nsteps):
    """Classical fourth-order Runge--Kutta with a fixed step.

    Returns all ``nsteps + 1`` samples; sample ``k`` sits at exactly
    ``t0 + k*dt``.
    """
    if dt == 0 or not math.isfinite(dt):
        raise ConfigurationError("dt must be finite and nonzero")
    if int(nsteps) != nsteps or nsteps < 1:
        raise ConfigurationError("nsteps must be a positive integer")
    nsteps = int(nsteps)
    u = np.array(u0, dtype=float).ravel()
    times = t0 + dt * np.arange(nsteps + 1)
    states = np.empty((nsteps + 1, u.size))
    states[0] = u
    half = 0.5 * dt
    for k in range(nsteps):
        t = times[k]
        k1 = np.asarray(rhs(t, u), dtype=float)
        k2 = np.asarray(rhs(t + half, u + half * k1), dtype=float)
        k3 = np.asarray(rhs(t + half, u + half * k2), dtype=float)
        k4 = np.asarray(rhs(t + dt, u + dt * k3), dtype=float)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(u)):
            raise NonFiniteStateError(
                f"non-finite state at step {k + 1} (t={times[k + 1]:g})", step=k + 1, time=times[k + 1]
            )
        states[k + 1] = u
    return Trajectory(times, states, nfev=4 * nsteps)


# Dormand--Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A = [np.array(row) for row in _A]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th- and embedded 4th-order weights
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_BETA = 0.04
_ALPHA = 1 / 5 - 0.75 * _BETA


def _rms(x):
    return math.sqrt(float(np.dot(x, x)) / x.size)


def _initial_step(rhs, t0, u0, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(u0)
    d0 = _rms(u0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    u1 = u0 + direction * h0 * f0
    f1 = np.asarray(rhs(t0 + direction * h0, u1), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def rk45_adaptive(rhs, tspan, u0, rtol=1e-6, atol=1e-9, first_step=None, max_step=np.inf, max_steps=10_000_000):
    """Adaptive Dormand--Prince 5(4) integration over ``tspan = (t0, tf)``.

    The scaled RMS of the embedded error estimate is kept below one, with
    ``atol + rtol*|u|`` as the per-component scale. ``tf < t0`` integrates
    backwards. Every accepted step is stored in the returned trajectory.
    """
    t0, tf = float(tspan[0]), float(tspan[1])
    if t0 == tf:
        raise ConfigurationError("tspan must have t0 != tf")
    if rtol <= 0 or atol <= 0:
        raise ConfigurationError("tolerances must be positive")
    direction = 1.0 if tf > t0 else -1.0
    u = np.array(u0, dtype=float).ravel()
    nfev = 0

    f = np.asarray(rhs(t0, u), dtype=float)
    nfev += 1
    if first_step is None:
        h = _initial_step(rhs, t0, u, f, direction, rtol, atol)
        nfev += 1
    else:
        h = abs(float(first_step))
    h = min(h, max_step, abs(tf - t0))

    times = [t0]
    states = [u.copy()]
    t = t0
    err_prev = 1e-4
    rejected = False
    K = np.empty((7, u.size))
    for _ in range(max_steps):
        if direction * (tf - t) <= 0:
            break
        min_step = 1e3 * EPS * abs(t)
        if h < min_step or h == 0.0:
            raise StiffnessError(f"step size underflow at t={t:.17g}; problem too stiff for rk45", time=t)
        last = h >= abs(tf - t) * (1 - 4 * EPS)
        if last:
            h = abs(tf - t)
        hs = direction * h
        K[0] = f
        for i in range(1, 7):
            K[i] = rhs(t + _C[i] * hs, u + hs * np.dot(_A[i], K[:i]))
        nfev += 6
        u_new = u + hs * np.dot(_B[:6], K[:6])
        err_vec = hs * np.dot(_E, K)
        scale = atol + rtol * np.maximum(np.abs(u), np.abs(u_new))
        err = _rms(err_vec / scale)
        if not math.isfinite(err):
            if not np.all(np.isfinite(u_new)) and h <= min_step * 10:
                raise NonFiniteStateError(f"non-finite state at t={t:.17g}", time=t)
            h *= _MIN_FACTOR
            rejected = True
            continue
        if err <= 1.0:
            t_new = tf if last else t + hs
            t = t_new
            u = u_new
            f = K[6].copy()
            times.append(t)
            states.append(u.copy())
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** -_ALPHA * err_prev**_BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            if rejected:
                factor = min(factor, 1.0)
            h = min(h * factor, max_step)
            err_prev = max(err, 1e-4)
            rejected = False
        else:
            factor = max(_MIN_FACTOR, _SAFETY * err ** -_ALPHA)
            h *= factor
            rejected = True
    else:
        raise NumericalError(f"max_steps={max_steps} exceeded at t={t:.17g}")
    return Trajectory(np.array(times), np.array(states), nfev=nfev)


def end_derivative(traj):
    """Backward difference at the final sample of ``traj``."""
    times, states = traj.times, traj.states
    if len(times) < 2:
        raise ConfigurationError("need at least two samples")
    dt = times[-1] - times[-2]
    if dt == 0:
        raise ConfigurationError("duplicate final times")
    return (states[-1] - states[-2]) / dt
