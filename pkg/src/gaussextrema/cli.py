"""Command-line entry point.

Every subcommand writes one table (``embed`` also writes a mesh).  Output
goes to ``--output`` when given, ``-`` meaning standard output, and
otherwise to ``<subcommand>.csv`` inside the directory named by
``$GAUSSEXTREMA_OUTPUT_DIR`` (default: the working directory).

Options may also come from a ``key = value`` file passed with ``--config``;
keys are the long option names (``r-max`` or ``r_max``).  Explicit flags
override the file, which overrides built-in defaults.

Exit status: 0 on success, 1 on invalid input, 2 on numerical failure
(including a failed ``verify`` check).
"""

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import actions, embedding, mcfield, twopoint, wallprofile
from .errors import NumericalError
from .io import format_csv, write_csv, write_obj
from .kernels import KernelConfig, make_kernel, normalize

__all__ = ["run", "main", "build_parser", "read_config"]

OUTPUT_ENV = "GAUSSEXTREMA_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _positive(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _count(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _floats(text):
    try:
        return [float(t) for t in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def read_config(path):
    """Parse a ``key = value`` file; blank lines and ``#`` comments are skipped."""
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}")
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _common(parser):
    g = parser.add_argument_group("kernel and output")
    g.add_argument("--kernel", choices=("random-wave", "gaussian", "membrane"), default="random-wave")
    g.add_argument("--amplitude", type=_positive, default=1.0,
                   help="kernel amplitude (random-wave, gaussian)")
    g.add_argument("--B", dest="B", type=_positive, default=1.0, help="membrane gradient variance")
    g.add_argument("--cutoff-a", type=_positive, default=0.01, help="membrane short-distance cutoff")
    g.add_argument("--output", "-o", help="output file, '-' for stdout")
    g.add_argument("--config", help="key = value file of option defaults")


def build_parser():
    parser = _Parser(prog="gaussextrema", description="Extremal-point statistics of Gaussian random fields.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("wall-profile", help="integrated charge f(y) and 4 pi rho next to a wall")
    _common(p)
    p.add_argument("--y-min", type=_positive, help="default 0.01 (membrane: 0.25)")
    p.add_argument("--y-max", type=_positive, default=10.0)
    p.add_argument("--n", type=_count, default=2001, help="number of samples")
    p.add_argument("--log-grid", action=argparse.BooleanOptionalAction,
                   help="logarithmic spacing (default for membrane)")

    p = sub.add_parser("two-point", help="psi(r) and (2 pi)^2 C(r) in the bulk")
    _common(p)
    p.add_argument("--r-min", type=_positive, default=0.01)
    p.add_argument("--r-max", type=_positive, default=10.0)
    p.add_argument("--n", type=_count, default=1000)

    p = sub.add_parser("embed", help="surface of revolution as OBJ plus contour CSV")
    _common(p)
    p.add_argument("--y-max", type=_positive, default=7.0)
    p.add_argument("--meridian-step", type=_positive, default=0.25)
    p.add_argument("--subdivisions", type=_count, default=4,
                   help="rings per meridian interval")
    p.add_argument("--n-angular", type=_count, default=64)
    p.add_argument("--contour", help="contour CSV path (default: next to the mesh)")

    p = sub.add_parser("curvature", help="wall-surface curvature R(y) or the four-point oracle table")
    _common(p)
    p.add_argument("--mode", choices=("wall", "oracle"), default="wall")
    p.add_argument("--y-min", type=_positive, default=0.01)
    p.add_argument("--y-max", type=_positive, default=7.0)
    p.add_argument("--n", type=_count, default=701)
    p.add_argument("--r", type=_floats, default=[0.5, 1.0, 2.0, 5.0], help="separations for --mode oracle")
    p.add_argument("--step", type=_positive, default=1e-3)

    p = sub.add_parser("verify", help="run numerical consistency checks and print a pass/fail table")
    _common(p)
    p.add_argument("--suite", choices=("sum-rule", "variational", "curvature", "legendre", "all"),
                   default="all")
    p.add_argument("--r-max", type=_positive, help="default 12 (random-wave: 60)")
    p.add_argument("--tol", type=_positive, help="override the pass threshold")

    p = sub.add_parser("mc", help="Monte Carlo estimators over random-wave realizations")
    _common(p)
    p.add_argument("--estimator", choices=("kernel", "density", "pair", "wall"), default="pair")
    p.add_argument("--realizations", type=_count, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--waves", type=_count, default=256)
    p.add_argument("--size", type=_positive, default=40.0, help="side length of the square domain")
    p.add_argument("--spacing", type=_positive, default=0.2, help="coarse grid spacing")
    p.add_argument("--bins", type=_floats, help="bin edges (pair: r, wall: y)")
    p.add_argument("--workers", type=_count, default=1)
    return parser


def _kernel(args, *, normalized=False):
    kind = args.kernel.replace("-", "_")
    kernel = make_kernel(KernelConfig(kind, args.amplitude, args.B, args.cutoff_a))
    return normalize(kernel) if normalized else kernel


def _output(args, suffix=".csv"):
    if args.output:
        return args.output
    base = Path(os.environ.get(OUTPUT_ENV) or ".")
    base.mkdir(parents=True, exist_ok=True)
    return str(base / f"{args.command}{suffix}")


def _emit(args, table, out, err):
    path = _output(args)
    if path == "-":
        out.write(format_csv(table))
        return
    write_csv(path, table)
    err.write(f"wrote {path}\n")


def _grid(lo, hi, n, log=False):
    if not hi > lo:
        raise ValueError(f"range must be ascending, got [{lo:g}, {hi:g}]")
    if n < 2:
        raise ValueError("need at least two samples")
    return np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)


def cmd_wall_profile(args, out, err):
    kernel = _kernel(args)
    y_min = args.y_min if args.y_min is not None else (0.25 if args.kernel == "membrane" else 0.01)
    log = args.log_grid if args.log_grid is not None else args.kernel == "membrane"
    prof = wallprofile.profile(kernel, _grid(y_min, args.y_max, args.n, log))
    _emit(args, {"y": prof.y_grid, "f": prof.f, "rho_4pi": prof.rho_4pi}, out, err)
    err.write(f"net charge {prof.net_charge_endpoint:.10g} (trapezoid {prof.net_charge:.10g})\n")


def cmd_two_point(args, out, err):
    kernel = _kernel(args, normalized=True)
    curve = twopoint.two_point_curve(kernel, _grid(args.r_min, args.r_max, args.n))
    _emit(args, {"r": curve.r_grid, "psi": curve.psi, "C_times_4pi2": curve.C_times_4pi2,
                 "method": list(curve.method_tags)}, out, err)
    i = int(np.argmin(curve.C_times_4pi2))
    err.write(f"minimum of (2 pi)^2 C: {curve.C_times_4pi2[i]:.6g} at r = {curve.r_grid[i]:.4g}\n")


def cmd_embed(args, out, err):
    kernel = _kernel(args)
    step = args.meridian_step / args.subdivisions
    n_steps = int(math.floor(args.y_max / step + 1e-9))
    y = step * np.arange(n_steps + 1)
    if kernel.domain_min > 0:
        y = y[y >= kernel.domain_min]
    prof = embedding.embed_profile(kernel, y)
    mesh = embedding.tessellate(prof, args.n_angular, gridline_step=args.meridian_step)
    obj = args.output if args.output else _output(args, ".obj")
    if obj == "-":
        raise ValueError("embed writes files; give a path for --output")
    contour = args.contour or str(Path(obj).with_suffix("")) + "_contour.csv"
    write_obj(obj, mesh)
    write_csv(contour, {"y": prof.y_samples, "A": prof.A, "B": prof.B, "valid": prof.valid})
    err.write(f"wrote {obj} ({mesh.vertices.shape[0]} vertices, {mesh.triangles.shape[0]} triangles)\n")
    err.write(f"wrote {contour}\n")
    out.write(f"meridians: {mesh.meridian_y.size}\n")


def cmd_curvature(args, out, err):
    if args.mode == "wall":
        kernel = _kernel(args)
        y = _grid(args.y_min, args.y_max, args.n)
        _emit(args, {"y": y, "R": embedding.curvature_profile(kernel, y)}, out, err)
        return
    kernel = _kernel(args, normalized=True)
    reports = [actions.curvature_report(kernel, r, args.step) for r in args.r]
    _emit(args, {"r": [c.r for c in reports], "R_closed": [c.R_closed for c in reports],
                 "R_fd": [c.R_fd for c in reports], "abs_diff": [c.abs_diff for c in reports]}, out, err)


def _verify_rows(args):
    kernel = _kernel(args, normalized=True)
    rw = args.kernel == "random-wave"
    r_max = args.r_max or (60.0 if rw else 12.0)
    suites = ("sum-rule", "variational", "curvature", "legendre") if args.suite == "all" else (args.suite,)
    rows = []
    if "sum-rule" in suites:
        rep = twopoint.sum_rule_check(kernel, r_max)
        tol = args.tol or (1e-4 if rw else 1e-8)
        rows.append(("sum_rule_residual", rep.residual, tol))
        rows.append(("n0_oracle_diff", abs(rep.n0_closed - rep.n0_quadrature), args.tol or 1e-8))
    if "variational" in suites:
        vmax = max(r_max, 12.0) if not rw else 40.0
        rep = actions.variational_check(kernel, 3.0, 1.0, 1e-5, r_max=vmax)
        scale = abs(rep.lagrangian) if not rw else 1.0
        rows.append(("variational_residual", rep.residual / scale, args.tol or (1e-4 if rw else 1e-6)))
    if "curvature" in suites:
        worst = max(actions.curvature_report(kernel, r).abs_diff for r in (0.5, 1.0, 2.0, 5.0))
        rows.append(("curvature_oracle_diff", worst, args.tol or 1e-4))
    if "legendre" in suites:
        gaps = [actions.legendre_check(kernel, r).gap for r in (r_max, 1.25 * r_max)]
        rows.append(("legendre_gap_drift", abs(gaps[1] - gaps[0]), args.tol or 1e-8))
        rows.append(("legendre_gap", gaps[0], float("inf")))
    return rows


def cmd_verify(args, out, err):
    rows = _verify_rows(args)
    ok = [abs(v) < t for _, v, t in rows]
    _emit(args, {"check": [r[0] for r in rows], "value": [r[1] for r in rows],
                 "threshold": [r[2] for r in rows], "passed": ok}, out, err)
    table = err if _output(args) == "-" else out
    for (name, value, tol), good in zip(rows, ok):
        table.write(f"{'PASS' if good else 'FAIL'}  {name:<24s} {value:.3e}  (< {tol:g})\n")
    if not all(ok):
        raise NumericalError("verification failed")


def cmd_mc(args, out, err):
    if args.kernel != "random-wave":
        raise ValueError("Monte Carlo supports the random-wave kernel only")
    n = int(round(args.size / args.spacing)) + 1
    half = args.estimator == "wall"
    spec = mcfield.WaveEnsembleSpec(n_waves=args.waves, n_realizations=args.realizations,
                                    seed=args.seed, domain=(0.0, args.size, 0.0, args.size),
                                    grid=(n, n), half_space=half)
    if args.estimator == "kernel":
        res = mcfield.estimate_kernel(spec, workers=args.workers)
    elif args.estimator == "density":
        res = mcfield.estimate_signed_density(spec, workers=args.workers)
    elif args.estimator == "pair":
        bins = args.bins or list(np.arange(0.5, 6.01, 0.5))
        res = mcfield.estimate_pair_correlation(spec, bins, workers=args.workers)
    else:
        bins = args.bins or list(np.arange(0.0, 12.01, 0.5))
        res = mcfield.estimate_wall_profile(spec, bins, workers=args.workers)
    _emit(args, {"bin_center": res.bin_centers, "mean": res.means,
                 "stderr": res.standard_errors, "n": res.n_samples}, out, err)
    for flag in res.flags:
        err.write(f"note: {flag}\n")


COMMANDS = {
    "wall-profile": cmd_wall_profile,
    "two-point": cmd_two_point,
    "embed": cmd_embed,
    "curvature": cmd_curvature,
    "verify": cmd_verify,
    "mc": cmd_mc,
}


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {unknown}")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def run(argv=None, out=None, err=None):
    """Run the CLI and return its exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parse(list(sys.argv[1:] if argv is None else argv))
        COMMANDS[args.command](args, out, err)
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INVALID
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_INVALID
    except NumericalError as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


def main():
    sys.exit(run())
