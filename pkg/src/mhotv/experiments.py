"""Experiment harness: signal/phantom generators, noise, metrics, the lambda
sweep, and the four studies (1-D recovery, 2-D tomography, the mean-error
table, and noiseless success-probability curves).

Every study is a deterministic function of its config; trials are independent
and may run in a process pool, with results keyed and sorted by trial index so
the output bytes do not depend on scheduling.
"""

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io_utils
from .errors import ConfigError, NumericalFailure, ShapeMismatch
from .forward import (LinearOperator, SinogramGeometry, cgls, filtered_backprojection,
                      gaussian_sensing, radon_operator, random_sensing,
                      sinogram_to_vector, vector_to_sinogram)
from .operators import build_stencil
from .solvers import RegularizerSpec, SolverOptions, admm_l1, constrained_l1
from .spectral import circular_convolve


# ---------------------------------------------------------------------------
# generators, noise, metrics

@dataclass
class PiecewisePolySpec:
    """Random piecewise polynomial: ``jumps`` uniformly placed interior
    discontinuities, one degree <= ``degree`` polynomial per segment on the
    segment-local coordinate u in [-1, 1], scaled to max |f| = 1.

    parametrization "nodal" (default) draws the polynomial's values at
    degree+1 equispaced nodes uniformly from [coeff_low, coeff_high], so every
    segment swings through independent O(1) values; "legendre" draws
    Legendre-basis coefficients uniformly instead.
    """
    degree: int = 2
    jumps: int = 5
    n: int = 1024
    coeff_low: float = -1.0
    coeff_high: float = 1.0
    seed: int = 0
    parametrization: str = "nodal"


def gen_piecewise_poly(spec):
    if spec.n < spec.jumps + 2:
        raise ConfigError("grid too small for the requested number of jumps")
    if spec.parametrization not in ("nodal", "legendre"):
        raise ConfigError(f"unknown parametrization {spec.parametrization!r}")
    rng = np.random.default_rng([int(spec.seed), 91])
    locs = np.sort(rng.choice(np.arange(1, spec.n), size=spec.jumps, replace=False))
    f = np.zeros(spec.n)
    edges = np.concatenate(([0], locs, [spec.n]))
    for a, b in zip(edges[:-1], edges[1:]):
        draw = rng.uniform(spec.coeff_low, spec.coeff_high, spec.degree + 1)
        u = 2.0 * (np.arange(a, b) - a) / max(b - a - 1, 1) - 1.0
        if spec.parametrization == "nodal":
            if spec.degree == 0:
                f[a:b] = draw[0]
            else:
                nodes = np.linspace(-1.0, 1.0, spec.degree + 1)
                coeff = np.polynomial.polynomial.polyfit(nodes, draw, spec.degree)
                f[a:b] = np.polynomial.polynomial.polyval(u, coeff)
        else:
            f[a:b] = np.polynomial.legendre.legval(u, draw)
    peak = np.abs(f).max()
    return f / peak if peak > 0 else f


_PHANTOM_REGIONS = [
    # kind, cx, cy, rx, ry, rotation_deg, value  (coords in units of the side)
    ("ellipse", 0.00, 0.00, 0.46, 0.46, 0.0, 0.55),
    ("ellipse", 0.02, 0.05, 0.30, 0.17, 25.0, 0.78),
    ("ellipse", -0.13, -0.16, 0.10, 0.19, -15.0, 0.30),
    ("ellipse", 0.24, 0.22, 0.065, 0.065, 0.0, 1.00),
    ("ellipse", -0.26, 0.21, 0.045, 0.045, 0.0, 0.92),
    ("ellipse", -0.31, -0.05, 0.050, 0.050, 0.0, 0.12),
    ("ellipse", 0.06, -0.30, 0.032, 0.032, 0.0, 0.06),
    ("ellipse", 0.30, -0.15, 0.022, 0.022, 0.0, 1.00),
    ("ellipse", -0.04, 0.33, 0.016, 0.016, 0.0, 0.00),
]


def phantom2d(n_pix):
    """Piecewise-constant phantom: a background disk with nested ellipses and
    small high-contrast disks spanning several feature scales; values in [0, 1].
    The construction is fixed (no randomness)."""
    if n_pix < 32:
        raise ConfigError("phantom requires n_pix >= 32")
    coords = (np.arange(n_pix) + 0.5) / n_pix - 0.5
    xs, ys = np.meshgrid(coords, coords)
    img = np.zeros((n_pix, n_pix))
    for _, cx, cy, rx, ry, rot, value in _PHANTOM_REGIONS:
        theta = math.radians(rot)
        dx, dy = xs - cx, ys - cy
        xr = dx * math.cos(theta) + dy * math.sin(theta)
        yr = -dx * math.sin(theta) + dy * math.cos(theta)
        img[(xr / rx) ** 2 + (yr / ry) ** 2 <= 1.0] = value
    return img


def add_noise(b, snr, seed, sigma=None):
    """Add i.i.d. Gaussian noise at a target RMS(signal)/RMS(noise) ratio.

    sigma = ||b|| / (sqrt(m) * snr); pass ``sigma`` to set the absolute level
    instead, or snr=None (or inf) for a no-op.
    """
    b = np.asarray(b, dtype=float)
    if sigma is None:
        if snr is None or math.isinf(snr):
            return b.copy()
        if snr <= 0:
            raise ConfigError("snr must be positive")
        sigma = float(np.linalg.norm(b)) / (math.sqrt(b.size) * snr)
    rng = np.random.default_rng([int(seed), 17])
    return b + sigma * rng.standard_normal(b.shape)


def rel_error(f, f_true):
    """Relative l2 error ||f - f_true|| / ||f_true||."""
    f = np.asarray(f, dtype=float)
    f_true = np.asarray(f_true, dtype=float)
    if f.shape != f_true.shape:
        raise ShapeMismatch(f"shape {f.shape} vs {f_true.shape}")
    return float(np.linalg.norm(f - f_true) / np.linalg.norm(f_true))


def sparsity_count(f, order, threshold_frac=1e-3):
    """l0 proxy: number of order-k finite-difference magnitudes above
    threshold_frac times their maximum."""
    d = circular_convolve(np.asarray(f, dtype=float), build_stencil(order, 1, len(f)).values)
    peak = np.abs(d).max()
    if peak == 0:
        return 0
    return int(np.sum(np.abs(d) > threshold_frac * peak))


# ---------------------------------------------------------------------------
# lambda sweep

@dataclass
class SweepResult:
    best_lam: float
    best_error: float
    lams: list
    errors: list
    best_f: np.ndarray = field(repr=False, default=None)


def default_lambda_grid(operator, b, points=12, low=1e-4, high=1e1):
    """Logarithmic grid scaled by max|A^T b| (a lambda-max style heuristic)."""
    scale = float(np.abs(operator.adjoint(np.asarray(b, dtype=float))).max())
    if scale == 0:
        scale = 1.0
    return np.geomspace(low, high, points) * scale


def lambda_sweep(solve, f_true, lam_grid, refine=0, warn_endpoints=True):
    """Per-lambda solves warm-started along a descending continuation path.

    ``solve(lam, state) -> (f, state)``.  With refine > 0, a second pass adds
    that many geometric points within one coarse step around the incumbent.
    The full coarse error curve is always returned; a winning endpoint trips a
    warning since it suggests the grid does not bracket the optimum.
    """
    lam_grid = np.asarray(sorted(lam_grid), dtype=float)
    errors = {}
    state = None
    for lam in lam_grid[::-1]:
        f, state = solve(lam, state)
        errors[float(lam)] = (rel_error(f, f_true), f)
    coarse_errors = [errors[float(lam)][0] for lam in lam_grid]
    best_lam = float(lam_grid[int(np.argmin(coarse_errors))])
    if warn_endpoints and lam_grid.size > 1 and best_lam in (float(lam_grid[0]), float(lam_grid[-1])):
        warnings.warn(f"lambda sweep optimum {best_lam:g} sits on the grid endpoint; widen the grid",
                      stacklevel=2)
    if refine > 0 and lam_grid.size > 1:
        step = lam_grid[1] / lam_grid[0]
        fine = np.geomspace(best_lam / step, best_lam * step, refine + 2)
        state = None
        for lam in fine[::-1]:
            f, state = solve(lam, state)
            errors[float(lam)] = (rel_error(f, f_true), f)
    best_lam = min(errors, key=lambda lam: errors[lam][0])
    best_error, best_f = errors[best_lam]
    return SweepResult(best_lam=best_lam, best_error=best_error,
                       lams=[float(v) for v in lam_grid], errors=coarse_errors, best_f=best_f)


# ---------------------------------------------------------------------------
# method grid helpers

def method_label(family, order, levels):
    order_txt = f"{order:g}"
    if family == "wavelet":
        return f"Daub{order_txt}"
    return (f"HOTV{order_txt}" if levels == 1 else f"MHOTV{order_txt}")


def _run_pool(worker, tasks, threads):
    if threads <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise NumericalFailure(f"{name} produced non-finite values")


# ---------------------------------------------------------------------------
# study 1: 1-D recovery (random sparse sampling, noisy)

@dataclass
class RecoveryConfig:
    n: int = 1024
    sampling: float = 0.5
    density: float = 0.1
    snr: float = 10.0
    degree: int = 2
    jumps: int = 5
    orders: tuple = (1, 2, 3)
    levels: int = 3
    include_wavelets: bool = True
    include_ls: bool = True
    trials: int = 20
    seed: int = 0
    lam_points: int = 12
    lam_refine: int = 6
    max_outer: int = 200
    cg_iters: int = 10
    primal_tol: float = 1e-6

    def __post_init__(self):
        if not self.orders or self.trials < 1 or not (0 < self.sampling <= 1):
            raise ConfigError("recovery config requires orders, trials >= 1, sampling in (0,1]")


def _recovery_methods(cfg):
    methods = []
    for order in cfg.orders:
        methods.append(("mhotv", order, 1))
        methods.append(("mhotv", order, cfg.levels))
        if cfg.include_wavelets and float(order) == int(order):
            methods.append(("wavelet", int(order), cfg.levels))
    return methods


def _recovery_trial(args):
    cfg, trial = args
    rng_seed = [cfg.seed, 1, trial]
    f_true = gen_piecewise_poly(PiecewisePolySpec(
        degree=cfg.degree, jumps=cfg.jumps, n=cfg.n,
        seed=np.random.default_rng(rng_seed).integers(2 ** 31)))
    m = int(round(cfg.sampling * cfg.n))
    operator = random_sensing(m, cfg.n, cfg.density,
                              seed=np.random.default_rng(rng_seed + [2]).integers(2 ** 31))
    clean = operator.apply(f_true)
    b = add_noise(clean, cfg.snr, seed=np.random.default_rng(rng_seed + [3]).integers(2 ** 31))
    opts = SolverOptions(max_outer=cfg.max_outer, cg_iters=cfg.cg_iters, primal_tol=cfg.primal_tol)
    grid = default_lambda_grid(operator, b, points=cfg.lam_points)
    rows = []
    recons = {}
    if cfg.include_ls:
        f_ls, rep = cgls(operator, b, max_iter=400, tol=1e-10)
        rows.append({"trial": trial, "method": "LS", "order": 0, "levels": 0,
                     "rel_error": rel_error(f_ls, f_true), "best_lambda": 0.0,
                     "rel_data_error": rep.rel_data_error,
                     "sparsity_count": sparsity_count(f_ls, max(int(o) for o in cfg.orders))})
        recons["LS"] = f_ls
    for family, order, levels in _recovery_methods(cfg):
        reg = RegularizerSpec(backend=family, order=order, levels=levels, lam=1.0)
        def solve(lam, state, _reg=reg):
            from .solvers import _admm_core
            f, state, _ = _admm_core(operator, b, replace(_reg, lam=lam), opts, (cfg.n,), state=state)
            return f, state
        sweep = lambda_sweep(solve, f_true, grid, refine=cfg.lam_refine)
        _check_finite("recovery solve", sweep.best_f)
        label = method_label(family, order, levels)
        data_err = float(np.linalg.norm(operator.apply(sweep.best_f) - b) / np.linalg.norm(b))
        rows.append({"trial": trial, "method": label, "order": float(order), "levels": levels,
                     "rel_error": sweep.best_error, "best_lambda": sweep.best_lam,
                     "rel_data_error": data_err,
                     "sparsity_count": sparsity_count(sweep.best_f, int(math.ceil(order)))})
        recons[label] = sweep.best_f
    return trial, rows, recons, f_true


def run_recovery_study(cfg, out_dir=None, threads=1):
    """Per-method relative errors with a per-seed lambda sweep, plus the
    order-k finite-difference sparsity diagnostic of each reconstruction."""
    start = time.perf_counter()
    results = _run_pool(_recovery_trial, [(cfg, t) for t in range(cfg.trials)], threads)
    results.sort(key=lambda item: item[0])
    rows = [row for _, trial_rows, _, _ in results for row in trial_rows]
    if out_dir is not None:
        out = Path(out_dir)
        chash = io_utils.config_hash(cfg)
        io_utils.write_csv(out / "recovery_errors.csv",
                           ["trial", "method", "order", "levels", "rel_error", "best_lambda",
                            "rel_data_error", "sparsity_count"],
                           [[r["trial"], r["method"], r["order"], r["levels"], r["rel_error"],
                             r["best_lambda"], r["rel_data_error"], r["sparsity_count"]] for r in rows])
        for trial, _, recons, f_true in results:
            io_utils.save_array(out / f"truth_trial{trial}.bin", f_true,
                                {"config_hash": chash, "seed": cfg.seed, "trial": trial, "role": "truth"})
            for label, rec in recons.items():
                io_utils.save_array(out / f"recon_trial{trial}_{label}.bin", rec,
                                    {"config_hash": chash, "seed": cfg.seed, "trial": trial,
                                     "role": "reconstruction", "method": label})
                order = max(int(o) for o in cfg.orders)
                diff = circular_convolve(rec, build_stencil(order, 1, cfg.n).values)
                mags = np.abs(diff)
                io_utils.write_csv(out / f"diag_diff{order}_trial{trial}_{label}.csv",
                                   ["index", "abs_diff", "log10_abs_diff"],
                                   [[i, mags[i], math.log10(max(mags[i], 1e-300))] for i in range(cfg.n)])
        io_utils.write_manifest(out, cfg, time.perf_counter() - start)
    return rows


# ---------------------------------------------------------------------------
# study 2: 2-D tomography

@dataclass
class TomoConfig:
    n_pix: int = 128
    n_angles: int = 29
    snr: float = 20.0
    orders: tuple = (1, 3)
    levels: int = 3
    nonneg: bool = True
    seed: int = 0
    lam_points: int = 12
    lam_refine: int = 4
    max_outer: int = 150
    cg_iters: int = 12
    primal_tol: float = 1e-6
    cgls_iters: int = 60

    def __post_init__(self):
        if not self.orders or self.n_pix < 32:
            raise ConfigError("tomo config requires orders and n_pix >= 32")


def _tomo_method(args):
    cfg, family, order, levels, sino_vec, f_true = args
    geom = SinogramGeometry.equispaced(cfg.n_pix, cfg.n_angles)
    operator = radon_operator(geom)
    opts = SolverOptions(max_outer=cfg.max_outer, cg_iters=cfg.cg_iters,
                         primal_tol=cfg.primal_tol, nonneg=cfg.nonneg)
    grid = default_lambda_grid(operator, sino_vec, points=cfg.lam_points)
    reg = RegularizerSpec(backend=family, order=order, levels=levels, lam=1.0)
    shape = (cfg.n_pix, cfg.n_pix)
    def solve(lam, state):
        from .solvers import _admm_core
        f, state, _ = _admm_core(operator, sino_vec, replace(reg, lam=lam), opts, shape, state=state)
        return f, state
    sweep = lambda_sweep(solve, f_true, grid, refine=cfg.lam_refine)
    data_err = float(np.linalg.norm(operator.apply(sweep.best_f.ravel()) - sino_vec)
                     / np.linalg.norm(sino_vec))
    label = method_label(family, order, levels)
    return label, {"method": label, "rel_error": sweep.best_error, "rel_data_error": data_err,
                   "best_lambda": sweep.best_lam}, sweep.best_f


def run_tomo_study(cfg, out_dir=None, threads=1):
    """FBP and CGLS baselines plus the regularized methods at the configured
    orders, each with a matched lambda sweep; returns one row per method."""
    start = time.perf_counter()
    f_true = phantom2d(cfg.n_pix)
    geom = SinogramGeometry.equispaced(cfg.n_pix, cfg.n_angles)
    operator = radon_operator(geom)
    clean = operator.apply(f_true.ravel())
    sino_vec = add_noise(clean, cfg.snr, seed=np.random.default_rng([cfg.seed, 2]).integers(2 ** 31))
    sino = vector_to_sinogram(sino_vec, geom)
    b_norm = float(np.linalg.norm(sino_vec))

    rows = []
    images = {}
    f_fbp = filtered_backprojection(sino, geom)
    rows.append({"method": "FBP", "rel_error": rel_error(f_fbp, f_true),
                 "rel_data_error": float(np.linalg.norm(operator.apply(f_fbp.ravel()) - sino_vec) / b_norm),
                 "best_lambda": 0.0})
    images["FBP"] = f_fbp
    f_cg, rep = cgls(operator, sino_vec, max_iter=cfg.cgls_iters, tol=1e-12)
    f_cg = f_cg.reshape(cfg.n_pix, cfg.n_pix)
    rows.append({"method": "CGLS", "rel_error": rel_error(f_cg, f_true),
                 "rel_data_error": rep.rel_data_error, "best_lambda": 0.0})
    images["CGLS"] = f_cg

    tasks = []
    for order in cfg.orders:
        tasks.append((cfg, "mhotv", order, 1, sino_vec, f_true))
        tasks.append((cfg, "mhotv", order, cfg.levels, sino_vec, f_true))
        if float(order) == int(order):
            tasks.append((cfg, "wavelet", int(order), cfg.levels, sino_vec, f_true))
    for label, row, img in _run_pool(_tomo_method, tasks, threads):
        rows.append(row)
        images[label] = img

    if out_dir is not None:
        out = Path(out_dir)
        chash = io_utils.config_hash(cfg)
        io_utils.write_csv(out / "tomo_errors.csv",
                           ["method", "rel_error", "rel_data_error", "best_lambda"],
                           [[r["method"], r["rel_error"], r["rel_data_error"], r["best_lambda"]]
                            for r in rows])
        io_utils.save_array(out / "sinogram.bin", sino,
                            {"config_hash": chash, "seed": cfg.seed, "role": "sinogram",
                             "geometry": geom.to_dict()})
        io_utils.write_pgm(out / "phantom.pgm", f_true)
        for label, img in images.items():
            io_utils.write_pgm(out / f"recon_{label}.pgm", img)
        io_utils.write_manifest(out, cfg, time.perf_counter() - start)
    return rows


# ---------------------------------------------------------------------------
# study 3: mean-error table (dense Gaussian sampling, piecewise quadratic)

@dataclass
class Table1Config:
    n: int = 512
    snrs: tuple = (2.0, 5.0, 10.0)
    orders: tuple = (1, 1.5, 2, 2.5, 3)
    levels: tuple = (1, 2, 3, 4)
    include_wavelets: bool = True
    degree: int = 2
    jumps: int = 5
    trials: int = 20
    seed: int = 0
    lam_points: int = 12
    lam_refine: int = 6
    max_outer: int = 400
    cg_iters: int = 10
    primal_tol: float = 1e-6

    def __post_init__(self):
        if not self.snrs or not self.orders or not self.levels or self.trials < 1:
            raise ConfigError("table config grids must be non-empty and trials >= 1")


def _table1_trial(args):
    cfg, snr, trial = args
    rng_seed = [cfg.seed, 3, int(round(10 * snr)), trial]
    f_true = gen_piecewise_poly(PiecewisePolySpec(
        degree=cfg.degree, jumps=cfg.jumps, n=cfg.n,
        seed=np.random.default_rng(rng_seed).integers(2 ** 31)))
    operator = gaussian_sensing(cfg.n, cfg.n,
                                seed=np.random.default_rng(rng_seed + [2]).integers(2 ** 31))
    b = add_noise(operator.apply(f_true), snr,
                  seed=np.random.default_rng(rng_seed + [3]).integers(2 ** 31))
    opts = SolverOptions(max_outer=cfg.max_outer, cg_iters=cfg.cg_iters, primal_tol=cfg.primal_tol)
    grid = default_lambda_grid(operator, b, points=cfg.lam_points)
    rows = []
    for order in cfg.orders:
        for levels in cfg.levels:
            families = ["mhotv"]
            if cfg.include_wavelets and float(order) == int(order):
                families.append("wavelet")
            for family in families:
                reg = RegularizerSpec(backend=family, order=order, levels=levels, lam=1.0)
                def solve(lam, state, _reg=reg):
                    from .solvers import _admm_core
                    f, state, _ = _admm_core(operator, b, replace(_reg, lam=lam), opts, (cfg.n,),
                                             state=state)
                    return f, state
                sweep = lambda_sweep(solve, f_true, grid, refine=cfg.lam_refine)
                _check_finite("table solve", sweep.best_f)
                rows.append({"snr": snr, "trial": trial, "family": family,
                             "order": float(order), "levels": levels,
                             "rel_error": sweep.best_error, "best_lambda": sweep.best_lam})
    return (snr, trial), rows


def run_table1(cfg, out_dir=None, threads=1):
    """Mean relative error per (snr, family, order, levels) cell with a
    per-trial lambda sweep; also emits a wide CSV shaped like the paper table."""
    start = time.perf_counter()
    tasks = [(cfg, snr, t) for snr in cfg.snrs for t in range(cfg.trials)]
    results = _run_pool(_table1_trial, tasks, threads)
    results.sort(key=lambda item: (item[0][0], item[0][1]))
    rows = [row for _, trial_rows in results for row in trial_rows]
    means = {}
    for r in rows:
        key = (r["snr"], r["family"], r["order"], r["levels"])
        means.setdefault(key, []).append(r["rel_error"])
    mean_rows = [{"snr": snr, "family": family, "order": order, "levels": levels,
                  "mean_rel_error": float(np.mean(v)), "trials": len(v)}
                 for (snr, family, order, levels), v in sorted(means.items())]
    if out_dir is not None:
        out = Path(out_dir)
        io_utils.write_csv(out / "table1_trials.csv",
                           ["snr", "trial", "family", "order", "levels", "rel_error", "best_lambda"],
                           [[r["snr"], r["trial"], r["family"], r["order"], r["levels"],
                             r["rel_error"], r["best_lambda"]] for r in rows])
        io_utils.write_csv(out / "table1_means.csv",
                           ["snr", "family", "order", "levels", "mean_rel_error", "trials"],
                           [[r["snr"], r["family"], r["order"], r["levels"], r["mean_rel_error"],
                             r["trials"]] for r in mean_rows])
        # wide layout: one row per (snr, levels), one column per (order, family)
        col_keys = []
        for order in cfg.orders:
            col_keys.append(("mhotv", float(order)))
            if cfg.include_wavelets and float(order) == int(order):
                col_keys.append(("wavelet", float(order)))
        lookup = {(r["snr"], r["family"], r["order"], r["levels"]): r["mean_rel_error"]
                  for r in mean_rows}
        wide = []
        for snr in cfg.snrs:
            for levels in cfg.levels:
                wide.append([snr, levels] + [lookup.get((snr, fam, order, levels), "")
                                             for fam, order in col_keys])
        io_utils.write_csv(out / "table1_wide.csv",
                           ["snr", "levels"] + [f"{fam}{order:g}" for fam, order in col_keys], wide)
        io_utils.write_manifest(out, cfg, time.perf_counter() - start)
    return mean_rows


# ---------------------------------------------------------------------------
# study 4: noiseless success-probability curves

@dataclass
class SuccessCurve:
    method: str
    rates: list
    fractions: list
    trials: int


@dataclass
class SuccessConfig:
    n: int = 1024
    density: float = 0.1
    degree: int = 1
    jumps: int = 5
    rates: tuple = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    orders: tuple = (2,)
    levels: int = 3
    include_wavelets: bool = True
    success_tol: float = 1e-2
    trials: int = 20
    seed: int = 0
    max_outer: int = 900
    al_outer: int = 30
    cg_iters: int = 10

    def __post_init__(self):
        if not self.rates or not self.orders or self.trials < 1:
            raise ConfigError("success config requires rates, orders, trials >= 1")
        if any(not 0 < r <= 1 for r in self.rates):
            raise ConfigError("sampling rates must lie in (0, 1]")


def _success_methods(cfg):
    methods = []
    for order in cfg.orders:
        methods.append(("mhotv", order, 1))
        methods.append(("mhotv", order, cfg.levels))
        if cfg.include_wavelets and float(order) == int(order):
            methods.append(("wavelet", int(order), cfg.levels))
    return methods


def _success_trial(args):
    cfg, rate, trial = args
    rng_seed = [cfg.seed, 4, int(round(1000 * rate)), trial]
    f_true = gen_piecewise_poly(PiecewisePolySpec(
        degree=cfg.degree, jumps=cfg.jumps, n=cfg.n,
        seed=np.random.default_rng(rng_seed).integers(2 ** 31)))
    m = int(round(rate * cfg.n))
    operator = random_sensing(m, cfg.n, cfg.density,
                              seed=np.random.default_rng(rng_seed + [2]).integers(2 ** 31))
    b = operator.apply(f_true)
    opts = SolverOptions(max_outer=cfg.max_outer, al_outer=cfg.al_outer, cg_iters=cfg.cg_iters)
    out = {}
    for family, order, levels in _success_methods(cfg):
        reg = RegularizerSpec(backend=family, order=order, levels=levels, lam=1.0)
        f, _ = constrained_l1(operator, b, reg, opts)
        out[method_label(family, order, levels)] = rel_error(f, f_true)
    return (rate, trial), out


def run_success_study(cfg, out_dir=None, threads=1):
    """Success fraction (relative error below success_tol in the noiseless
    constrained model) per sampling rate and method."""
    start = time.perf_counter()
    tasks = [(cfg, rate, t) for rate in cfg.rates for t in range(cfg.trials)]
    results = _run_pool(_success_trial, tasks, threads)
    results.sort(key=lambda item: (item[0][0], item[0][1]))
    labels = [method_label(*m) for m in _success_methods(cfg)]
    curves = []
    for label in labels:
        fractions = []
        for rate in cfg.rates:
            errs = [out[label] for (r, _), out in results if r == rate]
            fractions.append(float(np.mean([e < cfg.success_tol for e in errs])))
        curves.append(SuccessCurve(method=label, rates=[float(r) for r in cfg.rates],
                                   fractions=fractions, trials=cfg.trials))
    if out_dir is not None:
        out = Path(out_dir)
        io_utils.write_csv(out / "success_curves.csv",
                           ["method", "rate", "success_fraction", "trials"],
                           [[c.method, r, frac, c.trials]
                            for c in curves for r, frac in zip(c.rates, c.fractions)])
        io_utils.write_csv(out / "success_errors.csv",
                           ["rate", "trial"] + labels,
                           [[rate, trial] + [out_map[label] for label in labels]
                            for (rate, trial), out_map in results])
        io_utils.write_manifest(out, cfg, time.perf_counter() - start)
    return curves
