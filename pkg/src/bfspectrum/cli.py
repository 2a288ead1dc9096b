"""Command-line interface: ``bfspectrum {coeffs,sweep,trace8,boundary,validate}``.

Exit codes: 0 success, 1 validation failure, 2 usage or domain error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, asymptotics, validation
from .errors import DomainError, NumericalError
from .wavecoeff import stokes_coefficients

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

TRACE_COLUMNS = ("mu", "re_lp", "im_lp", "re_lm", "im_lm", "source")
BOUNDARY_COLUMNS = ("eps", "mu_critical", "ratio")
COEFF_COLUMNS = ("name", "harmonic", "cos", "sin")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def render(rows, columns, args, command: str) -> str:
    if args.format == "json":
        meta = {"version": __version__, "command": command, "config": _config_echo(args)}
        clean = [{k: (r[k] if isinstance(r[k], str) or np.isfinite(r[k]) else None) for k in columns} for r in rows]
        return json.dumps({"metadata": meta, "columns": list(columns), "rows": clean}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[k]) for k in columns])
    return buf.getvalue()


def _config_echo(args) -> dict:
    skip = {"func", "format", "out", "jobs"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pipeline(args) -> asymptotics.Pipeline:
    return asymptotics.Pipeline(args.modes, args.contour_radius, args.contour_nodes)


# -- subcommands ------------------------------------------------------------


def cmd_coeffs(args) -> int:
    sc = stokes_coefficients(args.eps)
    rows = []
    for name, poly in (("p", sc.p), ("a", sc.a)):
        rows.append({"name": name, "harmonic": 0, "cos": poly.constant, "sin": 0.0})
        for k, (c, s) in enumerate(zip(poly.cos_coeffs, poly.sin_coeffs), start=1):
            rows.append({"name": name, "harmonic": k, "cos": c, "sin": s})
    rows.append({"name": "c", "harmonic": 0, "cos": sc.c, "sin": 0.0})
    emit(render(rows, COEFF_COLUMNS, args, "coeffs"), args.out)
    return EXIT_OK


def _sweep_point(task):
    mu, eps, pipe = task
    try:
        return asymptotics.evaluate_point(mu, eps, pipe), None
    except (DomainError, NumericalError, np.linalg.LinAlgError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _map(func, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        # map preserves submission order, so rows come back in mu order
        return list(ex.map(func, tasks))


def cmd_sweep(args) -> int:
    _require(args, "eps", "mu_min", "mu_max")
    if not args.mu_min < args.mu_max:
        raise DomainError(f"--mu-min ({args.mu_min}) must be below --mu-max ({args.mu_max})")
    if args.steps < 2:
        raise DomainError("--steps must be at least 2")
    pipe = _pipeline(args)
    mus = np.linspace(args.mu_min, args.mu_max, args.steps)
    results = _map(_sweep_point, [(float(m), args.eps, pipe) for m in mus], args.jobs)
    rows, errors = [], []
    for mu, (row, err) in zip(mus, results):
        if err is not None:
            errors.append({"mu": float(mu), "error": err})
            row = {k: np.nan for k in asymptotics.SWEEP_COLUMNS}
            row["mu"] = float(mu)
        rows.append(row)
    emit(render(rows, asymptotics.SWEEP_COLUMNS, args, "sweep"), args.out)
    if errors:
        sidecar = (args.out + ".errors.csv") if args.out else None
        text = "mu,error\n" + "".join(f"{fmt(e['mu'])},\"{e['error']}\"\n" for e in errors)
        if sidecar:
            with open(sidecar, "w") as fh:
                fh.write(text)
        else:
            sys.stderr.write(text)
        print(f"{len(errors)} of {len(rows)} points failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_trace8(args) -> int:
    _require(args, "eps")
    trace = asymptotics.trace_figure8(args.eps, max(args.steps, 16), _pipeline(args))
    rows = [{"mu": p.mu, "re_lp": p.lambda_plus.real, "im_lp": p.lambda_plus.imag,
             "re_lm": p.lambda_minus.real, "im_lm": p.lambda_minus.imag, "source": p.source.value}
            for p in trace]
    emit(render(rows, TRACE_COLUMNS, args, "trace8"), args.out)
    print(f"mu_critical={fmt(trace.boundary.mu_critical)} max_re={fmt(trace.max_real)} "
          f"at mu={fmt(trace.mu_at_max)} collision_im={fmt(trace.collision_imag)}", file=sys.stderr)
    return EXIT_OK


def cmd_boundary(args) -> int:
    _require(args, "eps")
    pipe = _pipeline(args)
    rows = []
    for eps in args.eps_list:
        b = asymptotics.critical_mu(eps, pipe)
        rows.append({"eps": b.eps, "mu_critical": b.mu_critical, "ratio": b.ratio_to_asymptotic})
    emit(render(rows, BOUNDARY_COLUMNS, args, "boundary"), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    _require(args, "eps", "mu")
    checks = validation.run_checks(args.mu, args.eps, args.modes, args.contour_radius, args.contour_nodes)
    table = validation.format_table(checks)
    emit(table + "\n", args.out)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print("FAILED: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise DomainError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _radius(text):
    if text.lower() == "auto":
        return None
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=float, nargs="+", default=None, help="wave amplitude(s)")
    common.add_argument("--mu", type=float, help="Floquet exponent")
    common.add_argument("--mu-min", type=float)
    common.add_argument("--mu-max", type=float)
    common.add_argument("--steps", type=int, default=64, help="grid size (default 64)")
    common.add_argument("--modes", type=int, default=32, help="Fourier modes N (default 32)")
    common.add_argument("--contour-radius", type=_radius, default=None,
                        help="circle radius around 0, or 'auto' (default: auto, centred at i*mu)")
    common.add_argument("--contour-nodes", type=int, default=64, help="quadrature nodes (default 64)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")

    parser = argparse.ArgumentParser(prog="bfspectrum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (
        ("coeffs", cmd_coeffs, "print Stokes-wave coefficient tables"),
        ("sweep", cmd_sweep, "eigenvalues over a mu grid"),
        ("trace8", cmd_trace8, "figure-8 trace of the Benjamin-Feir eigenvalues"),
        ("boundary", cmd_boundary, "critical mu for one or more eps"),
        ("validate", cmd_validate, "run the invariant suite at one point"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    eps = args.eps
    args.eps_list = eps or []
    if eps is not None:
        if args.command != "boundary" and len(eps) != 1:
            parser.error("--eps takes a single value for this command")
        args.eps = eps[0]
    if args.command == "coeffs" and args.eps is None:
        args.eps = 0.0
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
