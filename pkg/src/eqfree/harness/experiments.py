"""Desk-scale reproductions of the projective-integration and patch experiments.

Every ``run_*`` function takes an :class:`ExperimentSpec` and returns a
``Report``: a dict of headline numbers plus a list of deterministic data
rows. Wall-clock timings are kept apart from the data so that repeated runs
produce identical data sections.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigurationError
from ..integrators import CountedRhs, rk45_adaptive
from ..patches1d import config_patches1, patch_rhs1, to_flat
from ..patches2d import (
    config_patches2,
    full_domain_oracle2,
    geometry_manifest,
    make_patch_rhs2,
    nonlinear_diffusion_rhs2,
    patch_edge_int2,
)
from ..projective import (
    PiConfig,
    burst_length_min,
    default_macro,
    pig,
    pirk2,
    pirk4,
    rk4_burst,
    rk45_burst,
)
from ..systems import heat_rhs1, make_slowfast, random_stiff_system, replace_first, take_first

ALGORITHMS = ("pig", "pirk2", "pirk4", "rk45-baseline", "patch1d", "patch2d")

HUMP_SEED = 2019
SNAPSHOT_TIMES = (0.0, 0.33, 1.0, 3.0)


@dataclass
class ExperimentSpec:
    name: str
    algorithm: str = "pig"
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = None
    format: str = "csv"
    parallel: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json")
        if int(self.parallel) < 1:
            raise ConfigurationError("parallel must be >= 1")

    def get(self, key, default):
        value = self.params.get(key)
        return default if value is None else value

    def echo(self):
        d = asdict(self)
        d.pop("out")
        d.pop("parallel")
        return d


@dataclass
class Report:
    summary: dict
    columns: list
    rows: list
    timing: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigurationError(f"{name} must be a positive number, got {value!r}")
    return float(value)


# --------------------------------------------------------------------------
# slow-fast system


def _segmented_baseline(rhs, times, u0, rtol):
    """Full micro simulation restarted at every macro time so that its
    states land exactly on them."""
    counted = CountedRhs(rhs)
    u = np.array(u0, dtype=float)
    states = [u.copy()]
    for a, b in zip(times[:-1], times[1:]):
        u = rk45_adaptive(counted, (a, b), u, rtol=rtol, atol=rtol).u_final
        states.append(u)
    return np.array(states), counted.count


def run_slowfast_pig(spec):
    beta = _positive("beta", spec.get("beta", 1e5))
    delta = _positive("burst", spec.get("burst", 2 / beta * math.log(beta)))
    t0, t1 = spec.get("tspan", (0.0, 6.0))
    rtol = _positive("rtol", spec.get("rtol", 1e-6))
    base_rtol = _positive("baseline_rtol", spec.get("baseline_rtol", 1e-8))
    u0 = np.asarray(spec.get("u0", (1.0, 0.0)), dtype=float)
    projection = spec.get("projection", "restrict")
    if projection not in ("restrict", "full"):
        raise ConfigurationError("projection must be 'restrict' or 'full'")
    if t0 == t1:
        raise ConfigurationError("tspan must have nonzero length")

    micro = CountedRhs(make_slowfast(beta))
    burst = rk45_burst(micro, rtol=1e-6, atol=1e-9)
    algo = spec.algorithm
    # "full" extrapolates the fast variable too, exposing the burst-length bound
    restrict, lift = (take_first, replace_first) if projection == "restrict" else (None, None)
    if algo == "pig":
        cfg = PiConfig(delta, record_bursts=True, record_svf=True)
        res = pig(default_macro(rtol, 1e-9), burst, (t0, t1), u0, restrict, lift, cfg)
    elif algo in ("pirk2", "pirk4"):
        Delta = _positive("dt_macro", spec.get("dt_macro", 0.05))
        cfg = PiConfig(delta, macro_step=Delta, record_bursts=True, record_svf=True)
        n = max(1, round(abs(t1 - t0) / Delta))
        grid = np.linspace(t0, t1, n + 1)
        fn = pirk2 if algo == "pirk2" else pirk4
        res = fn(burst, grid, u0, restrict, lift, cfg)
    else:
        raise ConfigurationError(f"slowfast-pig does not support algorithm {algo!r}")
    pi_evals = micro.count

    base_states, base_evals = _segmented_baseline(make_slowfast(beta), res.macro_times, u0, base_rtol)
    err = np.abs(res.macro_states[:, 0] - base_states[:, 0])
    summary = {
        "max_error": float(err.max()),
        "rhs_evals_pi": int(pi_evals),
        "rhs_evals_baseline": int(base_evals),
        "eval_ratio": pi_evals / base_evals,
        "macro_samples": int(len(res.macro_times)),
        "bursts": int(res.n_bursts),
        "burst_length": delta,
    }
    rows = [(t, X[0], ub[0], ub[1], e) for t, X, ub, e in zip(res.macro_times, res.macro_states, base_states, err)]
    extra = {"bursts": res.bursts, "svf": (res.svf_times, res.svf_dX), "result": res}
    return Report(summary, ["t", "U_pi", "u1_baseline", "u2_baseline", "abs_error"], rows, extra=extra)


# --------------------------------------------------------------------------
# random stiff linear systems


def _stiff_cell(n_fast, rep, seed, t_final, algo, pirk_step):
    sys = random_stiff_system(n_fast, seed=[seed, n_fast, rep])
    beta = 1e4
    rhs = CountedRhs(sys.rhs)
    burst = rk4_burst(rhs, 5e-5)
    X_exact = sys.restrict(sys.exact(t_final))
    t_start = time.perf_counter()
    if algo == "pirk4":
        delta = 2 * burst_length_min(beta, pirk_step).value
        grid = np.linspace(0.0, t_final, round(t_final / pirk_step) + 1)
        res = pirk4(burst, grid, sys.u0, sys.restrict, sys.lift, PiConfig(delta, macro_step=pirk_step))
    elif algo == "pig":
        delta = 2 / beta * math.log(beta)
        res = pig(default_macro(1e-6, 1e-8), burst, (0.0, t_final), sys.u0, sys.restrict, sys.lift, PiConfig(delta))
    else:
        raise ConfigurationError(f"stiff-scaling does not support algorithm {algo!r}")
    wall = time.perf_counter() - t_start
    rel = float(np.linalg.norm(res.macro_states[-1] - X_exact) / np.linalg.norm(X_exact))
    return {"n_fast": n_fast, "rep": rep, "algorithm": algo, "nfev": rhs.count, "rel_error": rel, "wall_time": wall}


def _quartiles(values):
    values = np.asarray(values, dtype=float)
    if np.all(np.isnan(values)):
        return np.full(3, np.nan)
    return np.nanpercentile(values, [25, 50, 75])


def _nanmax(values):
    values = np.asarray(values, dtype=float)
    return float("nan") if np.all(np.isnan(values)) else float(np.nanmax(values))


def run_stiff_scaling(spec):
    n_list = [int(n) for n in spec.get("n_fast", (0, 10, 20, 40))]
    if any(n < 0 for n in n_list):
        raise ConfigurationError("n_fast values must be non-negative")
    repeats = int(spec.get("repeats", 4))
    if repeats < 1:
        raise ConfigurationError("repeats must be >= 1")
    t_final = _positive("t_final", spec.get("t_final", 10.0))
    pirk_step = _positive("dt_macro", spec.get("dt_macro", 0.5))
    algos = spec.get("algorithms", ("pirk4", "pig"))

    _stiff_cell(0, 0, spec.seed, 1.0, "pirk4", 0.5)  # warm-up, discarded
    cells = [(n, r, a) for n in n_list for r in range(repeats) for a in algos]

    def work(cell):
        n, r, a = cell
        try:
            return _stiff_cell(n, r, spec.seed, t_final, a, pirk_step)
        except Exception as exc:  # recorded, sweep continues
            return {"n_fast": n, "rep": r, "algorithm": a, "nfev": -1, "rel_error": float("nan"),
                    "wall_time": float("nan"), "failure": f"{type(exc).__name__}: {exc}"}

    if spec.parallel > 1:
        with ThreadPoolExecutor(spec.parallel) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]

    rows = [(r["n_fast"], r["rep"], r["algorithm"], r["nfev"], r["rel_error"]) for r in results]
    timing = [(r["n_fast"], r["rep"], r["algorithm"], r["wall_time"]) for r in results]
    summary_rows = []
    for n in n_list:
        for a in algos:
            sel = [r for r in results if r["n_fast"] == n and r["algorithm"] == a]
            errs = np.array([r["rel_error"] for r in sel])
            walls = np.array([r["wall_time"] for r in sel])
            q, w = _quartiles(errs), _quartiles(walls)
            summary_rows.append({"n_fast": n, "algorithm": a, "err_q25": q[0], "err_median": q[1], "err_q75": q[2],
                                 "wall_q25": w[0], "wall_median": w[1], "wall_q75": w[2],
                                 "nfev_median": float(np.median([r["nfev"] for r in sel]))})
    failures = [r for r in results if "failure" in r]
    growth = {}
    for a in algos:
        med = [s["wall_median"] for s in summary_rows if s["algorithm"] == a]
        if len(n_list) > 1 and all(m > 0 for m in med):
            growth[a] = float(np.polyfit(np.log(10.0 + np.array(n_list)), np.log(med), 1)[0])
    crossover = None
    if spec.get("baseline", False):
        # direct explicit simulation of the full system, for the cost crossover
        for n in n_list:
            sys = random_stiff_system(n, seed=[spec.seed, n, 0])
            t_start = time.perf_counter()
            rk45_adaptive(sys.rhs, (0.0, t_final), sys.u0, rtol=1e-6, atol=1e-8)
            wall = time.perf_counter() - t_start
            timing.append((n, 0, "rk45-baseline", wall))
            pi = min(s["wall_median"] for s in summary_rows if s["n_fast"] == n)
            if crossover is None and pi < wall:
                crossover = n
    summary = {
        "max_rel_error": {a: _nanmax([r["rel_error"] for r in results if r["algorithm"] == a]) for a in algos},
        "failures": len(failures),
    }
    timing_summary = {"wall_growth_exponent": growth, "observed_crossover": crossover}
    return Report(summary, ["n_fast", "rep", "algorithm", "nfev", "rel_error"], rows, timing=timing,
                  extra={"summary_rows": summary_rows, "results": results, "timing_summary": timing_summary})


# --------------------------------------------------------------------------
# 2D patch simulation of nonlinear diffusion


def hump_config(ratio=0.25, nSubP=5, patches=(9, 7), ordCC=0):
    return config_patches2(nonlinear_diffusion_rhs2, (-3, 3, -2, 2), patches, ordCC, ratio, nSubP)


def hump_initial(cfg, seed=HUMP_SEED):
    """Perturbed Gaussian on the full lattice and its restriction to patches.

    Patch points are a subset of the full lattice, so both runs start from
    identical values wherever they overlap.
    """
    gx, gy = cfg.gx, cfg.gy
    M = (round((gx.b - gx.a) / gx.d), round((gy.b - gy.a) / gy.d))
    xf = gx.a + gx.d * np.arange(M[0])
    yf = gy.a + gy.d * np.arange(M[1])
    rng = np.random.default_rng(seed)
    U0 = np.exp(-xf[:, None] ** 2 - yf[None, :] ** 2) * (0.9 + 0.1 * rng.random(M))
    ix = np.rint((gx.x - gx.a) / gx.d).astype(int)
    iy = np.rint((gy.x - gy.a) / gy.d).astype(int)
    if not (np.allclose(gx.a + gx.d * ix, gx.x, atol=1e-12) and np.allclose(gy.a + gy.d * iy, gy.x, atol=1e-12)):
        raise ConfigurationError("patch lattice does not align with the full lattice")
    ix, iy = ix % M[0], iy % M[1]  # edge points may sit on the periodic seam
    u0 = U0[ix[:, None, :, None], iy[None, :, None, :]]
    return U0, u0, (ix, iy), M


def run_patch_diffusion2(spec):
    ratio = _positive("ratio", spec.get("ratio", 0.25))
    nSubP = int(spec.get("nSubP", 5))
    patches = tuple(spec.get("patches", (9, 7)))
    times = tuple(float(t) for t in spec.get("times", SNAPSHOT_TIMES))
    rtol = _positive("rtol", spec.get("rtol", 1e-7))
    seed = spec.seed if spec.seed else HUMP_SEED
    cfg = hump_config(ratio, nSubP, patches)
    U0, u0, (ix, iy), M = hump_initial(cfg, seed)

    rhs = CountedRhs(make_patch_rhs2(cfg))
    snaps = []
    u, t = np.ravel(u0, order="F"), times[0]
    for te in times:
        if te != t:
            u = rk45_adaptive(rhs, (t, te), u, rtol=rtol, atol=rtol * 1e-2).u_final
            t = te
        snaps.append(patch_edge_int2(cfg, u))
    full = full_domain_oracle2(nonlinear_diffusion_rhs2, (-3, 3, -2, 2), M, (times[0], times[-1]), U0,
                               tol=1e-8, t_eval=times)
    ci, cj = cfg.gx.nSubP // 2, cfg.gy.nSubP // 2
    discrepancy, mass = {}, {}
    for te, up, uf in zip(times, snaps, full):
        mid = up[ci, cj]
        ref = uf[ix[ci][:, None], iy[cj][None, :]]
        discrepancy[te] = float(np.abs(mid - ref).max() / np.abs(ref).max())
        mass[te] = float(uf.sum())
    mass0 = mass[times[0]]
    rows = []
    gxx, gyy = cfg.gx.x, cfg.gy.x
    n1, n2, N1, N2 = cfg.shape
    for te, up in zip(times, snaps):
        for J in range(N2):
            for I in range(N1):
                for j in range(1, n2 - 1):
                    for i in range(1, n1 - 1):
                        rows.append((te, I, J, gxx[i, I], gyy[j, J], up[i, j, I, J]))
    summary = {
        "mid_patch_discrepancy": discrepancy,
        "oracle_mass_drift": max(abs(m - mass0) for m in mass.values()),
        "initial_echo_error": float(np.abs(snaps[0][1:-1, 1:-1] - u0[1:-1, 1:-1]).max()),
        "patch_rhs_evals": rhs.count,
        "patch_fraction": float(cfg.size / (M[0] * M[1])),
    }
    extra = {"manifest": geometry_manifest(cfg), "snapshots": snaps, "full": full, "cfg": cfg, "u0": u0}
    return Report(summary, ["t", "I", "J", "x", "y", "u"], rows, extra=extra)


# --------------------------------------------------------------------------
# consistency order of the 1D coupling


def leading_macro_eigenvalue(ordCC, nPatch, ratio=0.25, nSubP=5, length=2 * np.pi):
    """Slowest decaying nonzero eigenvalue of the coupled 1D heat patches,
    from the dense Jacobian over interior unknowns, plus the corresponding
    eigenvalue of the full micro lattice."""
    cfg = config_patches1(heat_rhs1, (0.0, length), nPatch, ratio, ordCC, nSubP)
    mask = np.zeros(cfg.shape, dtype=bool)
    mask[1:-1] = True
    idx = np.flatnonzero(to_flat(mask))
    J = np.empty((idx.size, idx.size))
    e = np.zeros(cfg.size)
    for col, i in enumerate(idx):
        e[i] = 1.0
        J[:, col] = patch_rhs1(cfg, 0.0, e)[idx]
        e[i] = 0.0
    ev = np.sort(np.linalg.eigvals(J).real)[::-1]
    k = 2 * np.pi / length
    lattice = -4 / cfg.d**2 * math.sin(k * cfg.d / 2) ** 2
    return float(ev[1]), lattice, cfg.H


def run_convergence(spec):
    orders = [int(o) for o in spec.get("orders", (2, 4, 0))]
    n_list = [int(n) for n in spec.get("n_patches", (8, 16, 32))]
    ratio = _positive("ratio", spec.get("ratio", 0.25))
    rows, fits = [], {}
    for order in orders:
        Hs, errs = [], []
        for N in n_list:
            lam, exact, H = leading_macro_eigenvalue(order, N, ratio)
            Hs.append(H)
            errs.append(abs(lam - exact))
        if order > 0:
            slope = float(np.polyfit(np.log(Hs), np.log(errs), 1)[0])
        else:
            slope = float("nan")
        fits[order] = slope
        rows.extend((order, H, err, slope) for H, err in zip(Hs, errs))
    summary = {"fitted_order": fits, "max_error": {o: max(r[2] for r in rows if r[0] == o) for o in orders}}
    return Report(summary, ["ordCC", "H", "error", "fitted_order"], rows)


# --------------------------------------------------------------------------


def run_stability_map(spec):
    lo, hi = spec.get("range", (math.e, 1000.0))
    n = int(spec.get("points", 60))
    bD = np.geomspace(float(lo), float(hi), n)
    rows = [(x, burst_length_min(1.0, x).value / x) for x in bD]
    return Report({"points": n}, ["beta_Delta", "min_burst_over_Delta"], rows)
