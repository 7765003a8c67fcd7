"""Command-line front end.

Subcommands ``transfer``, ``cnr`` and ``optimize`` print JSON on stdout;
``simulate`` and ``sweep`` write files. Human-readable summaries go to
stderr. Exit codes: 0 success, 2 invalid arguments, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import analytics, experiments
from .chain import ChainParams, compute_transfer
from .errors import IfgiError
from .montecarlo import SimConfig, run_simulation, write_report
from .sample import load_mask, synthesize

OUTPUT_DIR_ENV = "IFGI_OUTPUT_DIR"

log = logging.getLogger("ifgi")


class ArgumentError(Exception):
    pass


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not value >= 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return value


def _add_chain(p: argparse.ArgumentParser, m_default=None):
    p.add_argument("--m", type=_positive_int, required=m_default is None, default=m_default,
                   help="number of beam splitters / interaction cycles M (integer >= 1)")
    p.add_argument("--gamma0", type=_probability, default=0.0,
                   help="loss probability per lower-arm reflection, dimensionless in [0, 1] (default 0)")
    p.add_argument("--gamma1", type=_probability, default=0.0,
                   help="loss probability per upper-arm reflection, dimensionless in [0, 1] (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifgi", description="Thermal interaction-free ghost imaging toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transfer", help="chain transfer coefficients (JSON)")
    _add_chain(p)

    p = sub.add_parser("cnr", help="closed-form image levels, CNR and visibility (JSON)")
    _add_chain(p)
    p.add_argument("--k", type=_positive_int, default=10_000, help="number of measurements K (default 10000)")
    p.add_argument("--u", type=_positive_float, default=100.0,
                   help="half the mean photons per speckle per shot, photons (default 100)")
    p.add_argument("--jp", type=_positive_int, required=True, help="transparent pixel count J_p")
    p.add_argument("--jb", type=_nonneg_int, required=True, help="opaque pixel count J_b")

    p = sub.add_parser("simulate", help="Monte Carlo ghost image (CSV + PGM + JSON report)")
    _add_chain(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--mask", type=Path, help="plain PBM (P1) sample mask, 1 = opaque")
    src.add_argument("--pattern", choices=["checkerboard", "half_plane", "random"], default="checkerboard",
                     help="synthesised mask when --mask is not given (default checkerboard)")
    p.add_argument("--width", type=_positive_int, default=32, help="synthesised mask width, pixels (default 32)")
    p.add_argument("--height", type=_positive_int, default=32, help="synthesised mask height, pixels (default 32)")
    p.add_argument("--alpha", type=_nonneg_float, default=1.0,
                   help="target opaque/transparent ratio for synthesised masks, dimensionless (default 1)")
    p.add_argument("--k", type=_positive_int, default=10_000, help="number of measurements K >= 2 (default 10000)")
    p.add_argument("--u", type=_positive_float, default=100.0,
                   help="half the mean photons per speckle per shot, photons (default 100)")
    p.add_argument("--seed", type=_seed, default=0, help="64-bit RNG seed (default 0)")
    p.add_argument("--detector", choices=["continuous", "poisson"], default="continuous",
                   help="detector model (default continuous)")
    p.add_argument("--threads", type=_nonneg_int, default=1, help="worker threads, 0 = all cores (default 1)")
    p.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")

    p = sub.add_parser("sweep", help="figure parameter sweep (CSV + manifest JSON)")
    p.add_argument("--figure", choices=["fig2", "fig3", "fig4", "fig5"], required=True)
    p.add_argument("--m", type=_positive_int, nargs="+", help="M values (default: figure's own)")
    p.add_argument("--alpha", type=_nonneg_float, nargs="+", help="alpha values, dimensionless")
    p.add_argument("--gamma1", type=_probability, nargs="+",
                   help="fig2 only: upper-arm loss curves, dimensionless (default 0 0.1 0.2 0.4)")
    p.add_argument("--grid", type=_positive_int, default=101, help="loss grid points per axis (default 101)")
    p.add_argument("--gamma-max", type=_probability, default=0.99,
                   help="upper end of the loss grid, dimensionless < 1 (default 0.99)")
    p.add_argument("--k-prime", type=_positive_int, default=10**6,
                   help="traditional-scheme measurements K' (default 1e6)")
    p.add_argument("--jp", type=_positive_int, default=10**4, help="transparent pixels J_p for --exact (default 1e4)")
    p.add_argument("--exact", action="store_true", help="use the finite-K CNR instead of the large-K limit")
    p.add_argument("--threads", type=_nonneg_int, default=1, help="accepted for symmetry; sweeps are vectorised")
    p.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")

    p = sub.add_parser("optimize", help="lower-arm loss that cancels the bucket background (JSON)")
    p.add_argument("--m", type=_positive_int, required=True, help="number of beam splitters M (>= 2)")
    p.add_argument("--gamma1", type=_probability, default=0.0, help="upper-arm loss probability in [0, 1]")
    p.add_argument("--alpha", type=_positive_float, required=True, help="opaque/transparent ratio > 0")
    return parser


def _out_dir(args) -> Path:
    out = args.out or Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _chain(args) -> ChainParams:
    try:
        return ChainParams(args.m, args.gamma0, args.gamma1)
    except ValueError as exc:
        raise ArgumentError(f"--m/--gamma0/--gamma1: {exc}") from exc


def cmd_transfer(args) -> dict:
    params = _chain(args)
    tc = compute_transfer(params)
    c = analytics.contrasts(tc)
    print(f"M={params.M}: chi_b0={abs(tc.chi_b0):.6g}, absorption weight={tc.absorption_weight:.6g}",
          file=sys.stderr)
    return {
        "M": params.M,
        "gamma0": params.gamma0,
        "gamma1": params.gamma1,
        "theta": params.theta,
        "chi_p0": tc.chi_p0.real,
        "chi_p1": tc.chi_p1.real,
        "chi_b0": tc.chi_b0.real,
        "chi_b1": tc.chi_b1.real,
        "chi_complex": {k: _complex(getattr(tc, k)) for k in ("chi_p0", "chi_p1", "chi_b0", "chi_b1")},
        "chi_abs": [z.real for z in tc.chi_abs],
        "absorption_weight": tc.absorption_weight,
        "C_p": float(c.C_p),
        "C_b": float(c.C_b),
        "visibility": float(analytics.visibility(tc)),
    }


def cmd_cnr(args) -> dict:
    params = _chain(args)
    if args.k < 2:
        raise ArgumentError("--k: the CNR needs K >= 2")
    budget = analytics.ExperimentBudget(args.k, args.u, args.jp, args.jb)
    tc = compute_transfer(params)
    c = analytics.contrasts(tc)
    G_p, G_b = analytics.expected_image_levels(c, budget)
    I0, I1, diff = analytics.bucket_means(tc, budget)
    out = {
        "M": params.M,
        "gamma0": params.gamma0,
        "gamma1": params.gamma1,
        "K": args.k,
        "u": args.u,
        "J_p": args.jp,
        "J_b": args.jb,
        "alpha": budget.alpha,
        "C_p": float(c.C_p),
        "C_b": float(c.C_b),
        "G_p": float(G_p),
        "G_b": float(G_b),
        "cnr": float(analytics.cnr_exact(c, budget)),
        "cnr_large_k": float(analytics.cnr_large_k(c, args.k, args.jp, budget.alpha)),
        "cnr_traditional": float(analytics.traditional_cnr(args.k, args.jp, args.jb)),
        "visibility": float(analytics.visibility(tc)),
        "bucket_I0": float(I0),
        "bucket_I1": float(I1),
        "bucket_diff": float(diff),
        "total_absorption": analytics.total_absorption(params, budget),
    }
    if params.M == 1 and params.ideal:
        out["note"] = "traditional reduction"
    print(f"CNR={out['cnr']:.6g} (traditional {out['cnr_traditional']:.6g})", file=sys.stderr)
    return out


def cmd_simulate(args) -> None:
    params = _chain(args)
    if args.k < 2:
        raise ArgumentError("--k: simulation needs K >= 2")
    try:
        if args.mask is not None:
            sample = load_mask(args.mask)
        else:
            sample = synthesize(args.pattern, args.width, args.height, args.alpha, args.seed)
    except (OSError, ValueError) as exc:
        raise ArgumentError(f"--mask/--pattern: {exc}") from exc
    cfg = SimConfig(params, sample, args.k, args.u, args.seed, args.detector)
    out = _out_dir(args)
    img, report = run_simulation(cfg, threads=args.threads)
    img.to_csv(out / "image.csv")
    img.to_pgm(out / "image.pgm")
    write_report(report, cfg, out / "report.json", img)
    print(
        f"wrote {out}/image.csv, image.pgm, report.json; CNR empirical={report.cnr_empirical:.4g}, "
        f"analytic={report.cnr_analytic:.4g}",
        file=sys.stderr,
    )


def cmd_sweep(args) -> None:
    spec = experiments.SweepSpec.figure_default(args.figure)
    try:
        grid = experiments.gamma_grid(args.grid, 0.0, args.gamma_max)
    except ValueError as exc:
        raise ArgumentError(f"--grid/--gamma-max: {exc}") from exc
    kwargs = dict(spec.to_dict())
    kwargs.update(gamma0=grid, K_prime=args.k_prime, J_p=args.jp, large_k=not args.exact)
    if args.figure != "fig2":
        kwargs["gamma1"] = grid
    elif args.gamma1:
        kwargs["gamma1"] = args.gamma1
    if args.m:
        kwargs["M_values"] = args.m
    if args.alpha:
        kwargs["alpha_values"] = args.alpha
    if args.figure == "fig3" and (args.m or args.alpha):
        kwargs["panels"] = None
    try:
        spec = experiments.SweepSpec(**kwargs)
    except ValueError as exc:
        raise ArgumentError(f"--m/--alpha/--gamma1: {exc}") from exc
    csv_path, manifest = experiments.write_sweep(spec, _out_dir(args))
    print(f"wrote {csv_path} and {manifest}", file=sys.stderr)


def cmd_optimize(args) -> dict:
    if args.m < 2:
        raise ArgumentError("--m: optimize needs M >= 2")
    roots = analytics.cancellation_roots(args.m, args.gamma1, args.alpha)
    gamma0 = analytics.optimize_gamma0(args.m, args.gamma1, args.alpha)
    c = analytics.contrasts(compute_transfer(ChainParams(args.m, gamma0, args.gamma1)))
    print(f"gamma0* = {gamma0:.12g}", file=sys.stderr)
    return {
        "M": args.m,
        "gamma1": args.gamma1,
        "alpha": args.alpha,
        "gamma0_star": gamma0,
        "roots": roots,
        "C_p": float(c.C_p),
        "C_b": float(c.C_b),
        "residual": float(c.C_p - args.alpha * c.C_b),
        "cnr_max_over_sqrt_K_per_Jp": math.sqrt(1.0 + 1.0 / args.alpha),
    }


COMMANDS = {
    "transfer": cmd_transfer,
    "cnr": cmd_cnr,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        result = COMMANDS[args.command](args)
    except ArgumentError as exc:
        print(f"ifgi {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (IfgiError, ValueError, OSError) as exc:
        print(f"ifgi {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if result is not None:
        json.dump(result, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def main() -> None:
    sys.exit(run_cli())
