"""Model problems and experiment generators."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalError

N_SLOW = 10
SLOW_BAND = (-0.1, 0.1)
FAST_BAND = (-20000.0, -10000.0)


def slowfast_rhs(t, u, beta=1e5):
    """Slow-fast pair: u1 slow, u2 relaxing onto cos(u1) at rate ``beta``."""
    c = math.cos(u[0])
    return np.array([c * math.sin(u[1]) * math.cos(t), beta * (c - u[1])])


def make_slowfast(beta=1e5):
    return lambda t, u: slowfast_rhs(t, u, beta)


def linear_fastslow_matrix(slow_rate=0.1, beta=1e4):
    """du1/dt = -slow_rate*u1,  du2/dt = -beta*(u2 - u1)."""
    return np.array([[-slow_rate, 0.0], [beta, -beta]])


def make_linear_rhs(A, b=None):
    A = np.asarray(A, dtype=float)
    if b is None:
        return lambda t, u: A @ u
    b = np.asarray(b, dtype=float)
    return lambda t, u: A @ u + b


def take_first(u):
    return np.asarray(u)[:1]


def replace_first(X, u_approx):
    u = np.array(u_approx, dtype=float)
    u[:1] = X
    return u


@dataclass
class LinearSystem:
    """du/dt = A u + b with A = Q diag(eigs) Q^T, Q orthogonal.

    The first ``N_SLOW`` columns of ``Q`` span the slow eigenspace.
    """

    A: np.ndarray
    b: np.ndarray
    u0: np.ndarray
    eigs: np.ndarray
    Q: np.ndarray
    n_slow: int = N_SLOW
    _shift: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if np.min(np.abs(self.eigs)) < 1e-12:
            raise NumericalError("matrix is numerically singular")
        # A^{-1} b through the eigendecomposition
        self._shift = self.Q @ ((self.Q.T @ self.b) / self.eigs)

    @property
    def dim(self):
        return self.A.shape[0]

    def rhs(self, t, u):
        return self.A @ u + self.b

    def exact(self, t):
        return exact_solution(self, t)

    def restrict(self, u):
        return self.Q[:, : self.n_slow].T @ u

    def lift(self, X, u_approx):
        Qs, Qf = self.Q[:, : self.n_slow], self.Q[:, self.n_slow :]
        return Qs @ X + Qf @ (Qf.T @ u_approx)


def random_stiff_system(n_fast, seed=0):
    """Random system with 10 slow and ``n_fast`` fast real eigenvalues.

    Eigenvalues are uniform on the slow band [-0.1, 0.1] and the fast band
    [-20000, -10000]; b and u0 are standard Gaussian.
    """
    if n_fast < 0 or int(n_fast) != n_fast:
        raise ConfigurationError("n_fast must be a non-negative integer")
    n_fast = int(n_fast)
    rng = np.random.default_rng(seed)
    dim = N_SLOW + n_fast
    eigs = np.concatenate([rng.uniform(*SLOW_BAND, N_SLOW), rng.uniform(*FAST_BAND, n_fast)])
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.sign(np.diag(R))
    A = (Q * eigs) @ Q.T
    b = rng.standard_normal(dim)
    u0 = rng.standard_normal(dim)
    return LinearSystem(A=A, b=b, u0=u0, eigs=eigs, Q=Q)


def exact_solution(sys, t):
    """u(t) = e^{At}(u0 + A^{-1}b) - A^{-1}b."""
    z = sys.Q.T @ (sys.u0 + sys._shift)
    return sys.Q @ (np.exp(sys.eigs * t) * z) - sys._shift


def heat_rhs1(t, u, x):
    """Discrete diffusion u_xx on every column of a lattice array.

    Rows 0 and -1 are halo/edge values; their derivative is left as NaN.
    """
    d = x[1, 0] - x[0, 0] if np.ndim(x) == 2 else x[1] - x[0]
    ut = np.full_like(u, np.nan, dtype=float)
    ut[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / d**2
    return ut


def nonlinear_diffusion_rhs1(t, u, x):
    """1D analogue of the cubic lattice diffusion, in flux form."""
    d = x[1, 0] - x[0, 0] if np.ndim(x) == 2 else x[1] - x[0]
    v = u**3
    ut = np.full_like(u, np.nan, dtype=float)
    ut[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / d**2
    return ut


def _nonlin_diffusion_2d():
    from .patches2d import nonlinear_diffusion_rhs2

    return nonlinear_diffusion_rhs2


SYSTEMS = {
    "slowfast": make_slowfast,
    "stiff-linear": random_stiff_system,
    "nonlin-diffusion-2d": _nonlin_diffusion_2d,
    "heat-1d": lambda: heat_rhs1,
}


def get_system(name):
    try:
        return SYSTEMS[name]
    except KeyError:
        raise ConfigurationError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None
