"""Patch (gap-tooth) scheme in one space dimension.

``N`` equispaced patches of ``n`` micro lattice points cover a periodic
macro domain ``[a, b)``. Patch edge values are not evolved: before every
derivative evaluation they are reconstructed from values elsewhere in the
patches by Lagrange or spectral interpolation across the macro grid.

Fields are ``(n, N)`` arrays, column ``j`` holding patch ``j``; the flat
vector handed to time integrators is their column-major ravel so that each
patch is contiguous.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EqfreeError
from .integrators import rk45_adaptive


class MicroRhsError(EqfreeError):
    pass


def lagrange_weights(order, s):
    """Weights of the degree-``order`` Lagrange interpolant through nodes at
    integer offsets ``-order/2 .. order/2``, evaluated at offset ``s``.

    >>> lagrange_weights(2, 0.5)
    array([-0.125,  0.75 ,  0.375])
    """
    if order < 2 or order % 2:
        raise ConfigurationError("Lagrange order must be even and >= 2")
    nodes = np.arange(-order // 2, order // 2 + 1, dtype=float)
    w = np.ones(order + 1)
    for k, xk in enumerate(nodes):
        for m, xm in enumerate(nodes):
            if m != k:
                w[k] *= (s - xm) / (xk - xm)
    return w


def _wavenumbers(N):
    return np.fft.fftfreq(N, 1.0 / N)


def spectral_shift(values, s, axis=-1):
    """Evaluate the periodic trigonometric interpolant of ``values`` (one
    sample per grid point along ``axis``) at every point shifted by ``s``
    grid spacings.

    For even ``N`` the Nyquist mode is scaled by ``cos(pi*s)`` so the result
    stays real.
    """
    values = np.asarray(values, dtype=float)
    N = values.shape[axis]
    k = _wavenumbers(N)
    phase = np.exp(2j * np.pi * k * s / N)
    if N % 2 == 0:
        phase[N // 2] = math.cos(math.pi * s)
    shape = [1] * values.ndim
    shape[axis] = N
    out = np.fft.ifft(np.fft.fft(values, axis=axis) * phase.reshape(shape), axis=axis)
    return out.real


def spectral_edge_values(mid_values, s):
    return spectral_shift(mid_values, s)


def lagrange_shift(values, weights, axis=-1):
    """Periodic Lagrange interpolation: ``sum_k w_k v[j+k]`` along ``axis``."""
    half = (len(weights) - 1) // 2
    out = np.zeros(np.shape(values))
    for w, k in zip(weights, range(-half, half + 1)):
        out += w * np.roll(values, -k, axis=axis)
    return out


def shift_values(values, s, order, axis=-1):
    """Interpolate periodic macro samples to offset ``s`` (in patch spacings)."""
    if order == 0:
        return spectral_shift(values, s, axis)
    return lagrange_shift(values, lagrange_weights(order, s), axis)


@dataclass(frozen=True)
class AxisGeometry:
    """Patch geometry along one axis.

    Index conventions are 0-based: the centre point is ``i0 = (n-1)/2``
    (half-integer when ``n`` is even), ``x[i, j] = X[j] + d*(i - i0)``.
    """

    a: float
    b: float
    nPatch: int
    ratio: float
    ordCC: int
    nSubP: int
    edgy: bool = False

    @property
    def H(self):
        return (self.b - self.a) / self.nPatch

    @property
    def X(self):
        return self.a + (np.arange(1, self.nPatch + 1) - 0.5) * self.H

    @property
    def i0(self):
        return (self.nSubP - 1) / 2

    @property
    def d(self):
        return self.ratio * self.H / self.i0

    @property
    def x(self):
        i = np.arange(self.nSubP)
        return self.X[None, :] + self.d * (i[:, None] - self.i0)

    @property
    def shifts(self):
        """(left, right) edge offsets from the source points, in units of H."""
        H, d = self.H, self.d
        if self.edgy:
            # right edge from the next-to-left-edge points and vice versa
            s = (self.x[-1, 0] - self.x[1, 0]) / H
            return -s, s
        return -self.ratio, self.ratio

    def sources(self):
        """Row indices supplying the (left, right) edge interpolation."""
        if self.edgy:
            return self.nSubP - 2, 1
        c = self.nSubP // 2
        return c, c


def make_axis(domain, nPatch, ratio, ordCC, nSubP, edgy=False):
    a, b = map(float, domain)
    if not b > a:
        raise ConfigurationError("domain must satisfy a < b")
    if int(nSubP) != nSubP or nSubP < 3:
        raise ConfigurationError("nSubP must be an integer >= 3")
    if not edgy and nSubP % 2 == 0:
        raise ConfigurationError("nSubP must be odd unless edgy coupling is used")
    if edgy and nSubP < 4:
        raise ConfigurationError("edgy coupling needs nSubP >= 4")
    if not 0 < ratio <= 0.5:
        raise ConfigurationError("ratio must lie in (0, 0.5]")
    if int(ordCC) != ordCC or ordCC < 0:
        raise ConfigurationError("ordCC must be a non-negative integer")
    if ordCC % 2:
        raise ConfigurationError("odd ordCC (staggered grids) is not supported")
    if int(nPatch) != nPatch or nPatch < 1:
        raise ConfigurationError("nPatch must be a positive integer")
    if ordCC > 0 and nPatch < ordCC + 2:
        raise ConfigurationError(f"ordCC={ordCC} needs at least {ordCC + 2} patches")
    return AxisGeometry(a, b, int(nPatch), float(ratio), int(ordCC), int(nSubP), bool(edgy))


def axis_edges(geom, u, patch_axis, sub_axis):
    """Fill both edge slices of ``u`` along ``sub_axis`` in place."""
    left_src, right_src = geom.sources()
    s_left, s_right = geom.shifts
    take = lambda i: np.take(u, i, axis=sub_axis)
    # patch_axis index shifts down by one once sub_axis is removed
    pa = patch_axis - (1 if patch_axis > sub_axis else 0)
    right = shift_values(take(right_src), s_right, geom.ordCC, axis=pa)
    left = shift_values(take(left_src), s_left, geom.ordCC, axis=pa)
    idx = [slice(None)] * u.ndim
    idx[sub_axis] = geom.nSubP - 1
    u[tuple(idx)] = right
    idx[sub_axis] = 0
    u[tuple(idx)] = left
    return u


@dataclass(frozen=True)
class PatchConfig1:
    micro_rhs: object
    geom: AxisGeometry
    weights: tuple = field(default=None)

    # geometry shortcuts
    @property
    def H(self):
        return self.geom.H

    @property
    def X(self):
        return self.geom.X

    @property
    def d(self):
        return self.geom.d

    @property
    def x(self):
        return self.geom.x

    @property
    def nPatch(self):
        return self.geom.nPatch

    @property
    def nSubP(self):
        return self.geom.nSubP

    @property
    def ordCC(self):
        return self.geom.ordCC

    @property
    def shape(self):
        return (self.geom.nSubP, self.geom.nPatch)

    @property
    def size(self):
        return self.geom.nSubP * self.geom.nPatch


def config_patches1(micro_rhs, domain, nPatch, ratio, ordCC, nSubP, edgy=False, bc=None):
    """Build the patch geometry for a periodic 1D macro domain.

    ``micro_rhs(t, u, x)`` receives ``(nSubP, nPatch)`` arrays whose edge
    rows already hold coupled values and returns ``du/dt`` (edge rows of
    the result are ignored).
    """
    if bc is not None:
        raise ConfigurationError("only periodic macro domains are implemented")
    geom = make_axis(domain, nPatch, ratio, ordCC, nSubP, edgy)
    weights = None
    if geom.ordCC > 0:
        sl, sr = geom.shifts
        weights = (tuple(lagrange_weights(geom.ordCC, sl)), tuple(lagrange_weights(geom.ordCC, sr)))
    return PatchConfig1(micro_rhs, geom, weights)


def to_field(cfg, u_flat):
    u = np.asarray(u_flat, dtype=float)
    if u.shape == cfg.shape:
        return u.copy()
    if u.size != cfg.size:
        raise ConfigurationError(f"expected {cfg.size} values, got {u.size}")
    return u.reshape(cfg.shape, order="F").copy()


def to_flat(u):
    return np.ravel(u, order="F")


def patch_edge_int1(cfg, u):
    """Return a copy of ``u`` with edge rows set by inter-patch coupling."""
    u = to_field(cfg, u)
    return axis_edges(cfg.geom, u, patch_axis=1, sub_axis=0)


def patch_rhs1(cfg, t, u_flat):
    """Time derivative of the flat patch state, edges held at zero rate."""
    u = patch_edge_int1(cfg, u_flat)
    try:
        ut = np.array(cfg.micro_rhs(t, u, cfg.x), dtype=float)
    except Exception as exc:
        raise MicroRhsError(f"micro_rhs failed at t={t:g}: {exc}") from exc
    if ut.shape != u.shape:
        raise MicroRhsError(f"micro_rhs returned shape {ut.shape}, expected {u.shape}")
    ut[0, :] = 0.0
    ut[-1, :] = 0.0
    bad = ~np.isfinite(ut)
    if bad.any():
        j = int(np.argwhere(bad)[0][1])
        raise MicroRhsError(f"micro_rhs produced non-finite values in patch {j} at t={t:g}")
    return to_flat(ut)


def make_patch_rhs1(cfg):
    return lambda t, u: patch_rhs1(cfg, t, u)


def periodic_lattice(domain, total_points):
    a, b = map(float, domain)
    return a + (b - a) / total_points * np.arange(total_points)


def full_domain_rhs1(micro_rhs, x):
    """Apply the patch micro code to a whole periodic lattice via halo cells."""
    d = x[1] - x[0]
    xp = np.concatenate([[x[0] - d], x, [x[-1] + d]])[:, None]

    def rhs(t, u):
        up = np.concatenate([u[-1:], u, u[:1]])[:, None]
        return np.asarray(micro_rhs(t, up, xp))[1:-1, 0]

    return rhs


def full_domain_oracle(micro_rhs, domain, total_points, t_span, u0, tol=1e-8):
    """Brute-force micro simulation on the full periodic lattice."""
    x = periodic_lattice(domain, total_points)
    u0 = np.asarray(u0(x) if callable(u0) else u0, dtype=float)
    return rk45_adaptive(full_domain_rhs1(micro_rhs, x), t_span, u0, rtol=tol, atol=tol)


def patch_csv_rows(cfg, u):
    """Rows ``(patch, i, x, u)`` for interior points; edges are omitted so
    plots show gaps between patches."""
    u = patch_edge_int1(cfg, u)
    x = cfg.x
    rows = []
    for j in range(cfg.nPatch):
        for i in range(1, cfg.nSubP - 1):
            rows.append((j, i, x[i, j], u[i, j]))
    return rows
