"""Command-line interface.

Subcommands: ``stencil dump``, ``filter dump``, ``recover1d``, ``tomo2d``,
``table1``, ``success``, ``sweep``, ``adjoint-check``.  Study parameters come
from an optional TOML config (one table per study) with CLI flags overriding;
every study writes CSV/JSON artifacts plus a manifest.json into --out.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np
import tomli

from . import experiments as xp
from . import io_utils
from .errors import ConfigError, MhotvError, NumericalFailure
from .forward import SinogramGeometry, adjoint_check, gaussian_sensing, radon_operator, random_sensing
from .operators import build_stencil, filter_values
from .solvers import RegularizerSpec, SolverOptions, admm_l1
from .wavelets import daubechies_filters


def _load_config_table(path, table):
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file is not valid TOML: {exc}") from exc
    section = data.get(table, {})
    if not isinstance(section, dict):
        raise ConfigError(f"config table [{table}] must be a table")
    return section


def _build_config(cls, section, overrides):
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown config keys for {cls.__name__}: {sorted(unknown)}")
    merged = dict(section)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    for key, value in list(merged.items()):
        if isinstance(value, list):
            merged[key] = tuple(value)
    try:
        return cls(**merged)
    except (TypeError, MhotvError) as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from exc


def _dump_stencil(args):
    stencil = build_stencil(args.order, args.scale, args.length)
    rows = [[i, v] for i, v in enumerate(stencil.values)]
    if args.out:
        io_utils.write_csv(args.out, ["index", "value"], rows)
    else:
        sys.stdout.write("index,value\n")
        for i, v in rows:
            sys.stdout.write(f"{i},{io_utils.format_cell(v)}\n")
    return 0


def _dump_filter(args):
    if args.wavelet:
        filt = daubechies_filters(int(args.order))
        rows = [[i, h, g] for i, (h, g) in enumerate(zip(filt.lowpass, filt.highpass))]
        header = ["index", "lowpass", "highpass"]
    else:
        values = filter_values(args.order, args.scale, args.length)
        rows = [[i, v.real, v.imag] for i, v in enumerate(values)]
        header = ["xi", "re", "im"]
    if args.out:
        io_utils.write_csv(args.out, header, rows)
    else:
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join(io_utils.format_cell(v) for v in row) + "\n")
    return 0


def _study_overrides(args, extra=()):
    overrides = {"seed": args.seed, "trials": getattr(args, "trials", None)}
    for name in extra:
        overrides[name] = getattr(args, name.replace("-", "_"), None)
    return overrides


def _run_recover1d(args):
    cfg = _build_config(xp.RecoveryConfig, _load_config_table(args.config, "recover1d"),
                        _study_overrides(args))
    rows = xp.run_recovery_study(cfg, out_dir=args.out, threads=args.threads)
    sys.stdout.write(f"recover1d: {len(rows)} rows -> {args.out}\n")
    return 0


def _run_tomo2d(args):
    section = _load_config_table(args.config, "tomo2d")
    overrides = {"seed": args.seed}
    cfg = _build_config(xp.TomoConfig, section, overrides)
    rows = xp.run_tomo_study(cfg, out_dir=args.out, threads=args.threads)
    for r in rows:
        sys.stdout.write(f"{r['method']}: rel_error={r['rel_error']:.4f} "
                         f"rel_data_error={r['rel_data_error']:.4f}\n")
    return 0


def _run_table1(args):
    cfg = _build_config(xp.Table1Config, _load_config_table(args.config, "table1"),
                        _study_overrides(args))
    rows = xp.run_table1(cfg, out_dir=args.out, threads=args.threads)
    sys.stdout.write(f"table1: {len(rows)} mean cells -> {args.out}\n")
    return 0


def _run_success(args):
    cfg = _build_config(xp.SuccessConfig, _load_config_table(args.config, "success"),
                        _study_overrides(args))
    curves = xp.run_success_study(cfg, out_dir=args.out, threads=args.threads)
    for c in curves:
        sys.stdout.write(f"{c.method}: {c.fractions}\n")
    return 0


def _run_sweep(args):
    rng_seed = 0 if args.seed is None else args.seed
    spec = xp.PiecewisePolySpec(degree=args.degree, n=args.n, seed=rng_seed)
    f_true = xp.gen_piecewise_poly(spec)
    operator = random_sensing(int(round(args.sampling * args.n)), args.n, 0.1, seed=rng_seed)
    b = xp.add_noise(operator.apply(f_true), args.snr, seed=rng_seed)
    reg = RegularizerSpec(backend="mhotv", order=args.order, levels=args.levels, lam=1.0,
                          path=args.backend)
    opts = SolverOptions(max_outer=args.max_outer)
    grid = xp.default_lambda_grid(operator, b, points=args.lam_points)
    from .solvers import _admm_core
    from dataclasses import replace

    def solve(lam, state):
        f, state, _ = _admm_core(operator, b, replace(reg, lam=lam), opts, (args.n,), state=state)
        return f, state

    sweep = xp.lambda_sweep(solve, f_true, grid)
    rows = list(zip(sweep.lams, sweep.errors))
    if args.out:
        io_utils.write_csv(Path(args.out) / "sweep.csv", ["lambda", "rel_error"], rows)
        params = {k: v for k, v in vars(args).items() if not callable(v)}
        io_utils.write_manifest(args.out, params, 0.0)
    sys.stdout.write(f"best lambda {sweep.best_lam!r} rel_error {sweep.best_error!r}\n")
    return 0


def _run_adjoint_check(args):
    if args.which == "radon":
        operator = radon_operator(SinogramGeometry.equispaced(args.n, 12))
    elif args.which == "sensing":
        operator = random_sensing(max(args.n // 2, 1), args.n, 0.1, seed=args.seed or 0)
    elif args.which == "gaussian":
        operator = gaussian_sensing(args.n, args.n, seed=args.seed or 0)
    else:
        raise ConfigError(f"unknown operator {args.which!r}")
    deviation = adjoint_check(operator, trials=args.trials or 10)
    sys.stdout.write(f"{args.which}: max adjoint deviation {deviation:.3e}\n")
    if deviation > args.tol:
        raise NumericalFailure(f"adjoint deviation {deviation:.3e} exceeds tolerance {args.tol:g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="mhotv", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    stencil = sub.add_parser("stencil", help="stencil utilities").add_subparsers(
        dest="subcommand", required=True)
    dump = stencil.add_parser("dump", help="write a stencil as CSV (index,value)")
    dump.add_argument("--order", type=int, required=True)
    dump.add_argument("--scale", type=int, default=1)
    dump.add_argument("--length", type=int, required=True)
    dump.add_argument("--out", type=str, default=None)
    dump.set_defaults(func=_dump_stencil)

    filt = sub.add_parser("filter", help="filter utilities").add_subparsers(
        dest="subcommand", required=True)
    fdump = filt.add_parser("dump", help="write a Fourier filter as CSV (xi,re,im)")
    fdump.add_argument("--order", type=float, required=True)
    fdump.add_argument("--scale", type=int, default=1)
    fdump.add_argument("--length", type=int, default=64)
    fdump.add_argument("--wavelet", action="store_true",
                       help="dump Daubechies filter taps instead")
    fdump.add_argument("--out", type=str, default=None)
    fdump.set_defaults(func=_dump_filter)

    def study_parser(name, helptext, with_trials=True):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=str, default=None, help="TOML config path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, required=True)
        p.add_argument("--threads", type=int, default=1)
        if with_trials:
            p.add_argument("--trials", type=int, default=None)
        return p

    study_parser("recover1d", "noisy 1-D recovery study").set_defaults(func=_run_recover1d)
    study_parser("tomo2d", "2-D tomography study", with_trials=False).set_defaults(func=_run_tomo2d)
    study_parser("table1", "mean-error table study").set_defaults(func=_run_table1)
    study_parser("success", "noiseless success-probability study").set_defaults(func=_run_success)

    sweep = sub.add_parser("sweep", help="lambda sweep on a seeded 1-D problem")
    sweep.add_argument("--n", type=int, default=256)
    sweep.add_argument("--degree", type=int, default=2)
    sweep.add_argument("--sampling", type=float, default=0.5)
    sweep.add_argument("--snr", type=float, default=10.0)
    sweep.add_argument("--order", type=float, default=2)
    sweep.add_argument("--levels", type=int, default=3)
    sweep.add_argument("--lam-points", type=int, default=12)
    sweep.add_argument("--max-outer", type=int, default=150)
    sweep.add_argument("--backend", choices=("fourier", "decomp"), default="fourier")
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--out", type=str, default=None)
    sweep.set_defaults(func=_run_sweep)

    check = sub.add_parser("adjoint-check", help="dot-product adjoint verification")
    check.add_argument("--which", choices=("radon", "sensing", "gaussian"), default="radon")
    check.add_argument("--n", type=int, default=32)
    check.add_argument("--trials", type=int, default=10)
    check.add_argument("--tol", type=float, default=1e-8)
    check.add_argument("--seed", type=int, default=None)
    check.set_defaults(func=_run_adjoint_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except (NumericalFailure, FloatingPointError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3
    except MhotvError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
