"""Patch scheme on a 2D array of patches.

Fields are 4-index arrays ``u[i, j, I, J]``: micro point ``(i, j)`` inside
patch ``(I, J)``. Geometry along each axis follows the 1D construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .integrators import rk45_adaptive
from .patches1d import MicroRhsError, axis_edges, make_axis, periodic_lattice


@dataclass(frozen=True)
class PatchConfig2:
    micro_rhs: object
    gx: object
    gy: object

    @property
    def shape(self):
        return (self.gx.nSubP, self.gy.nSubP, self.gx.nPatch, self.gy.nPatch)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def x(self):
        """x coordinates broadcastable against a field, shape (n1, 1, N1, 1)."""
        return self.gx.x[:, None, :, None]

    @property
    def y(self):
        return self.gy.x[None, :, None, :]


def config_patches2(micro_rhs, domains, patch_counts, ordCC, ratio, nSubP, bc=None):
    """Configure patches on the periodic rectangle ``domains = (a1, b1, a2, b2)``.

    ``ratio`` and ``nSubP`` may be scalars or per-axis pairs.
    """
    if bc is not None and not (isinstance(bc, float) and np.isnan(bc)):
        raise ConfigurationError("only periodic macro domains are implemented")
    a1, b1, a2, b2 = map(float, domains)
    N1, N2 = patch_counts
    r1, r2 = np.broadcast_to(ratio, 2)
    n1, n2 = np.broadcast_to(nSubP, 2)
    o1, o2 = np.broadcast_to(ordCC, 2)
    gx = make_axis((a1, b1), int(N1), float(r1), int(o1), int(n1))
    gy = make_axis((a2, b2), int(N2), float(r2), int(o2), int(n2))
    return PatchConfig2(micro_rhs, gx, gy)


def to_field2(cfg, u_flat):
    u = np.asarray(u_flat, dtype=float)
    if u.shape == cfg.shape:
        return u.copy()
    if u.size != cfg.size:
        raise ConfigurationError(f"expected {cfg.size} values, got {u.size}")
    return u.reshape(cfg.shape, order="F").copy()


def patch_edge_int2(cfg, u):
    """Fill all four edge faces of every patch.

    x-faces first (from interior rows), then y-faces over the whole x-range
    including the freshly set corners.
    """
    u = to_field2(cfg, u)
    interior = u[:, 1:-1]
    axis_edges(cfg.gx, interior, patch_axis=2, sub_axis=0)
    u[:, 1:-1] = interior
    axis_edges(cfg.gy, u, patch_axis=3, sub_axis=1)
    return u


def patch_rhs2(cfg, t, u_flat):
    u = patch_edge_int2(cfg, u_flat)
    try:
        ut = np.array(cfg.micro_rhs(t, u, cfg.x, cfg.y), dtype=float)
    except Exception as exc:
        raise MicroRhsError(f"micro_rhs failed at t={t:g}: {exc}") from exc
    if ut.shape != u.shape:
        raise MicroRhsError(f"micro_rhs returned shape {ut.shape}, expected {u.shape}")
    ut[[0, -1], :, :, :] = 0.0
    ut[:, [0, -1], :, :] = 0.0
    bad = ~np.isfinite(ut)
    if bad.any():
        _, _, I, J = np.argwhere(bad)[0]
        raise MicroRhsError(f"micro_rhs produced non-finite values in patch ({I}, {J}) at t={t:g}")
    return np.ravel(ut, order="F")


def make_patch_rhs2(cfg):
    return lambda t, u: patch_rhs2(cfg, t, u)


def nonlinear_diffusion_rhs2(t, u, x, y):
    """du/dt = delta_x^2(u^3)/dx^2 + delta_y^2(u^3)/dy^2 on interior points.

    ``x`` and ``y`` broadcast against ``u`` along axes 0 and 1; edge faces of
    the result are NaN.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    dx = x.reshape(x.shape[0], -1)[1, 0] - x.reshape(x.shape[0], -1)[0, 0]
    yy = np.moveaxis(y, 1, 0)
    dy = yy.reshape(yy.shape[0], -1)[1, 0] - yy.reshape(yy.shape[0], -1)[0, 0]
    v = u**3
    ut = np.full(u.shape, np.nan)
    ut[1:-1, 1:-1] = (v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / dx**2 + (
        v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]
    ) / dy**2
    return ut


def full_domain_rhs2(micro_rhs, x, y):
    """Whole periodic lattice as one patch with a one-point halo."""
    dx, dy = x[1] - x[0], y[1] - y[0]
    xp = np.concatenate([[x[0] - dx], x, [x[-1] + dx]])[:, None, None, None]
    yp = np.concatenate([[y[0] - dy], y, [y[-1] + dy]])[None, :, None, None]
    shape = (len(x), len(y))

    def rhs(t, u):
        g = np.pad(u.reshape(shape), 1, mode="wrap")[:, :, None, None]
        return np.asarray(micro_rhs(t, g, xp, yp))[1:-1, 1:-1, 0, 0].ravel()

    return rhs


def full_domain_oracle2(micro_rhs, domains, points, t_span, u0, tol=1e-8, t_eval=None):
    """Full-lattice reference run; ``u0`` is an ``(M1, M2)`` array.

    With ``t_eval`` the run is split into segments ending exactly at those
    times and the states there are returned as a list.
    """
    a1, b1, a2, b2 = map(float, domains)
    x = periodic_lattice((a1, b1), points[0])
    y = periodic_lattice((a2, b2), points[1])
    rhs = full_domain_rhs2(micro_rhs, x, y)
    u = np.asarray(u0, dtype=float).ravel()
    if t_eval is None:
        return rk45_adaptive(rhs, t_span, u, rtol=tol, atol=tol)
    out, t = [], t_span[0]
    for te in t_eval:
        if te != t:
            u = rk45_adaptive(rhs, (t, te), u, rtol=tol, atol=tol).u_final
            t = te
        out.append(u.reshape(points))
    return out


def field_csv_rows(cfg, u):
    """Rows ``(I, J, x, y, u)`` for interior micro points of every patch."""
    u = patch_edge_int2(cfg, u)
    x, y = cfg.gx.x, cfg.gy.x
    n1, n2, N1, N2 = cfg.shape
    rows = []
    for J in range(N2):
        for I in range(N1):
            for j in range(1, n2 - 1):
                for i in range(1, n1 - 1):
                    rows.append((I, J, x[i, I], y[j, J], u[i, j, I, J]))
    return rows


def geometry_manifest(cfg):
    """Plain-data description of the patch layout for plotting scripts."""
    out = {}
    for name, g in (("x", cfg.gx), ("y", cfg.gy)):
        out[name] = {
            "domain": [g.a, g.b],
            "nPatch": g.nPatch,
            "nSubP": g.nSubP,
            "ratio": g.ratio,
            "ordCC": g.ordCC,
            "H": g.H,
            "d": g.d,
            "centres": g.X.tolist(),
        }
    return out
