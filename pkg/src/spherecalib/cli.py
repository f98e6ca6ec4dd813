"""Command-line front end.

Subcommands:
  h-profile   solve the line-density ODE system and tabulate h and f_i
  verify      run the full verification battery for one (k, R)
  scan        minimum of h over a radius grid, with sign flags
  euclid      flat-limit comparison over a decreasing radius sequence

Output goes to --out or standard output; --format selects csv or json.
Exit codes: 0 success, 1 verification or solver failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .composite import boundary_samples, build_W, euclid_limit_compare, \
    singularity_scaling, tangency_residual
from .errors import SphereCalibError, SignViolation, StiffnessFailure, \
    UnsupportedDimension
from .hsystem import constraint_check, require_even_k, solve_h_for
from .quadrature import QuadratureSpec
from .sphere import make_spec
from .verify import area_balance, div_bound_scan, flagged_windows, sign_scan

_PI_RE = re.compile(r"^\s*(?:(\d+(?:\.\d+)?)\s*\*?\s*)?pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$")


def parse_radius(text: str) -> float:
    """Float literal or a pi fraction like 'pi/3', '2pi/5', 'pi'."""
    m = _PI_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse radius {text!r}")


def parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:stop:step")
    start, stop, step = (parse_radius(v) for v in parts)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs stop >= start and step > 0")
    n = int(round((stop - start) / step)) + 1
    vals = [start + i * step for i in range(n) if start + i * step <= stop + 1e-12]
    if not vals:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\r\n".join(lines) + "\r\n"


def _json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CALIB_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    w = _workers()
    if w == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))


def _config_echo(args: argparse.Namespace) -> dict:
    echo = {key: val for key, val in vars(args).items() if key != "func"}
    return {k: (v if not isinstance(v, float) else float(v)) for k, v in echo.items()}


# ---------------------------------------------------------------------------


def cmd_h_profile(args) -> int:
    try:
        require_even_k(args.k)
        hsol = solve_h_for(args.k, args.R, tol=args.ode_tol)
    except UnsupportedDimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StiffnessFailure, SphereCalibError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    j = args.k // 2
    s = np.linspace(args.R, math.pi - hsol.delta_end, args.samples)
    h = hsol.h_fun(s)
    f = hsol.f_fun(s)
    if args.format == "csv":
        header = ["s", "h"] + [f"f_{i}" for i in range(1, j)]
        rows = [[s[m], h[m]] + [f[i, m] for i in range(j - 1)] for m in range(len(s))]
        _write(_csv(header, rows), args.out)
    else:
        summary = {
            "k": args.k,
            "R": args.R,
            "integral": hsol.integral,
            "min_h": hsol.min_h,
            "argmin": hsol.argmin,
            "constraint_residual": constraint_check(args.k, args.R, tol=args.ode_tol)["residual"],
            "config": _config_echo(args),
        }
        _write(_json(summary), args.out)
    return 0


def cmd_verify(args) -> int:
    quad = QuadratureSpec(abs_tol=args.quad_tol)
    checks: dict[str, dict] = {}
    overall = True

    def record(name: str, passed, **data):
        nonlocal overall
        passed = bool(passed)
        overall = overall and passed
        checks[name] = {"pass": passed, **data}

    try:
        require_even_k(args.k)
        spec = make_spec(args.k, args.R, n=args.n)
        field = build_W(spec, ode_tol=args.ode_tol, quad=quad)
    except UnsupportedDimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SphereCalibError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    tan = tangency_residual(
        field, boundary_samples(spec, args.boundary_samples, seed=args.seed))
    record("tangency", tan["max_residual"] <= 1e-6, **tan)

    rows = singularity_scaling(field, [1e-2, 3e-3, 1e-3])
    target = rows[-1]["coefficient_target"]
    rel = abs(rows[-1]["scaled_magnitude"] - target) / target
    line_terms = [r["scaled_line_term"] for r in rows]
    record("singularity", rel <= 0.02 and all(
        b < a for a, b in zip(line_terms, line_terms[1:])),
        relative_coefficient_error=rel, rows=rows)

    try:
        rep = div_bound_scan(field, n_points=args.samples, seed=args.seed,
                             exclusion=args.exclusion, margin_tol=args.margin_tol)
        record("divergence_bound", rep.passed, min_margin=rep.min_margin,
               argmin=rep.argmin, samples=len(rep.records))
    except SignViolation as exc:
        record("divergence_bound", False, error=str(exc))

    coarse = area_balance(field, 0.05)
    fine = area_balance(field, 0.025)
    flux_rel = abs(fine.small_flux - fine.flux_target) / fine.flux_target
    record("area_balance", flux_rel <= 0.01 and fine.model_residual < coarse.model_residual,
           flux=fine.small_flux, flux_target=fine.flux_target,
           flux_relative_error=flux_rel,
           model_residuals=[coarse.model_residual, fine.model_residual],
           exact_residuals=[coarse.residual, fine.residual])

    payload = {
        "k": args.k,
        "R": args.R,
        "pass": overall,
        "checks": checks,
        "config": _config_echo(args),
        "version": __version__,
    }
    if args.format == "csv":
        rows_out = [[name, data["pass"]] for name, data in checks.items()]
        _write(_csv(["check", "pass"], rows_out), args.out)
    else:
        _write(_json(payload), args.out)
    return 0 if overall else 1


def cmd_scan(args) -> int:
    try:
        require_even_k(args.k)
    except UnsupportedDimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = _map_ordered(
        lambda R: sign_scan(args.k, [R], tol=args.ode_tol)[0], args.R_grid)
    if args.format == "csv":
        table = [[r["R"], r["min_h"], r["argmin"], r["flag"]] for r in rows]
        _write(_csv(["R", "min_h", "argmin", "flag"], table), args.out)
    else:
        _write(_json({
            "k": args.k,
            "rows": rows,
            "flagged_windows": flagged_windows(rows),
            "config": _config_echo(args),
        }), args.out)
    if args.expect_nonnegative and any(r["flag"] for r in rows):
        return 1
    return 0


def cmd_euclid(args) -> int:
    if len(args.R) < 2:
        print("error: euclid needs a decreasing sequence of at least two radii",
              file=sys.stderr)
        return 2
    try:
        result = euclid_limit_compare(
            args.k, args.R, n_samples=args.samples, seed=args.seed,
            ode_tol=args.ode_tol, quad=QuadratureSpec(abs_tol=args.quad_tol))
    except UnsupportedDimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.format == "csv":
        table = list(zip(result["R_seq"], result["max_errors"]))
        _write(_csv(["R", "max_error"], [list(r) for r in table]), args.out)
    else:
        _write(_json({**result, "config": _config_echo(args)}), args.out)
    errs = result["max_errors"]
    r_seq = result["R_seq"]
    decreasing = all(errs[i + 1] < errs[i]
                     for i in range(len(errs) - 1) if r_seq[i + 1] < r_seq[i])
    return 0 if decreasing else 1


# ---------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ode-tol", type=float, default=1e-10)
    sp.add_argument("--quad-tol", type=float, default=1e-9)
    sp.add_argument("--format", choices=("csv", "json"), default="json")
    sp.add_argument("--out", default=None, metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spherecalib",
        description="Calibration fields for sharp area bounds in spherical caps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    hp = sub.add_parser("h-profile", help="tabulate the line density h")
    hp.add_argument("--k", type=int, required=True)
    hp.add_argument("--R", type=parse_radius, required=True)
    hp.add_argument("--samples", type=int, default=1000)
    _add_common(hp)
    hp.set_defaults(func=cmd_h_profile)

    vf = sub.add_parser("verify", help="full verification battery")
    vf.add_argument("--k", type=int, required=True)
    vf.add_argument("--R", type=parse_radius, required=True)
    vf.add_argument("--n", type=int, default=None)
    vf.add_argument("--samples", type=int, default=500)
    vf.add_argument("--boundary-samples", type=int, default=64)
    vf.add_argument("--exclusion", type=float, default=1e-3)
    vf.add_argument("--margin-tol", type=float, default=1e-6)
    _add_common(vf)
    vf.set_defaults(func=cmd_verify)

    sc = sub.add_parser("scan", help="sign scan of h over a radius grid")
    sc.add_argument("--k", type=int, required=True)
    sc.add_argument("--R-grid", type=parse_grid, required=True)
    sc.add_argument("--expect-nonnegative", action="store_true")
    _add_common(sc)
    sc.set_defaults(func=cmd_scan)

    eu = sub.add_parser("euclid", help="flat-limit comparison")
    eu.add_argument("--k", type=int, required=True)
    eu.add_argument("--R", type=parse_radius, nargs="+", required=True)
    eu.add_argument("--samples", type=int, default=24)
    _add_common(eu)
    eu.set_defaults(func=cmd_euclid)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("ode_tol", "quad_tol"):
        if getattr(args, name) <= 0:
            print(f"error: --{name.replace('_', '-')} must be positive",
                  file=sys.stderr)
            return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
