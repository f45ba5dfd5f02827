"""Command-line interface: correlator scans, static/boundary evaluators,
validation suites, and machine-readable CSV/JSON output.

Exit codes: 0 success, 1 configuration error, 2 convergence failure
(partial results still written, flagged), 3 I/O failure.
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import BoseFredholmError, ConvergenceFailure
from .kernels import (
    DIRICHLET,
    GeometryParams,
    NEUMANN,
    ThermalParams,
    kernel_K_static,
    kernel_L,
    kernel_theta,
    kernel_V,
    kernel_W,
)
from .correlators import (
    PhysicalPoint,
    correlation_boundary_neumann,
    correlation_ground,
    correlation_static,
    correlation_thermal,
    density_of_temperature,
)
from .special_integrals import RegularizationPolicy

CSV_HEADER = ("x1,x2,t,T,h,D,eps,value_re,value_im,det_re,det_im,deriv_re,deriv_im,"
              "err,n,truncation,deltas,flag,runtime_ms")


class CliError(Exception):
    """Configuration problem; maps to exit code 1."""


def _fmt(x, digits):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.{digits}g}"


def parse_range(text):
    """Scalar or 'start:stop:count' linspace triple."""
    parts = str(text).split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) == 3:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise CliError(f"range count must be >= 1 in {text!r}")
        return list(np.linspace(start, stop, count))
    raise CliError(f"cannot parse range {text!r} (want scalar or start:stop:count)")


def build_policy(args):
    return RegularizationPolicy(damping=args.damping, extrapolation_orders=args.orders)


def _eps_kind(eps):
    if eps in ("+", "+1", "1", "neumann"):
        return NEUMANN
    if eps in ("-", "-1", "dirichlet"):
        return DIRICHLET
    raise CliError(f"unknown boundary kind {eps!r}")


def _record(point, value, det, deriv, err, n, trunc, deltas, flag, ms):
    return {
        "x1": point[0], "x2": point[1], "t": point[2], "T": point[3],
        "h": point[4], "D": point[5], "eps": point[6],
        "value_re": float(np.real(value)), "value_im": float(np.imag(value)),
        "det_re": float(np.real(det)), "det_im": float(np.imag(det)),
        "deriv_re": float(np.real(deriv)), "deriv_im": float(np.imag(deriv)),
        "err": err, "n": n, "truncation": trunc,
        "deltas": "/".join(f"{d:g}" for d in deltas),
        "flag": flag, "runtime_ms": ms,
    }


def emit(records, fmt, path, digits=15):
    """Write records as CSV (fixed header) or a JSON array."""
    if not records:
        raise CliError("no records to emit")
    try:
        out = open(path, "w") if path else sys.stdout
        try:
            if fmt == "csv":
                out.write(CSV_HEADER + "\n")
                for r in records:
                    fields = []
                    for key in CSV_HEADER.split(","):
                        v = r[key]
                        fields.append(_fmt(v, digits) if isinstance(v, float) else str(v))
                    out.write(",".join(fields) + "\n")
            else:
                cooked = []
                for r in records:
                    c = {}
                    for k, v in r.items():
                        c[k] = float(_fmt(v, digits)) if isinstance(v, float) else v
                    cooked.append(c)
                json.dump(cooked, out, indent=1)
                out.write("\n")
        finally:
            if path:
                out.close()
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _one_correlate(task):
    (x1, x2, t, T, h, D, eps), n, damping, orders, tol = task
    kind = _eps_kind(eps)
    start = time.perf_counter()
    flag = ""
    if kind is DIRICHLET and x1 == 0.0:
        flag = "dirichlet-null"
    thermal = ThermalParams(h=h, T=T)
    pt = PhysicalPoint(x1, x2, t, kind, thermal, D=D)
    try:
        if T > 0:
            res = correlation_thermal(pt, n=n, tol=tol)
        else:
            res = correlation_ground(pt, n=n)
        ms = 1000.0 * (time.perf_counter() - start)
        return _record((x1, x2, t, T, h, D, eps), res.value, res.det_part,
                       res.derivative_part, res.error_estimate, res.grid_size,
                       res.truncation, RegularizationPolicy(damping, orders).deltas,
                       flag, ms), None
    except ConvergenceFailure as exc:
        ms = 1000.0 * (time.perf_counter() - start)
        rec = _record((x1, x2, t, T, h, D, eps), float("nan"), float("nan"),
                      float("nan"), float("nan"), n, 0.0,
                      RegularizationPolicy(damping, orders).deltas,
                      "convergence-failure", ms)
        return rec, exc


def _scan_points(args):
    points = []
    for x1 in parse_range(args.x1):
        for x2 in parse_range(args.x2):
            for t in parse_range(args.t):
                points.append((x1, x2, t, args.T, args.h, args.D, args.eps))
    return points


def _workers():
    raw = os.environ.get("BF_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def cmd_correlate(args):
    points = _scan_points(args)
    tasks = [(p, args.n, args.damping, args.orders, args.tol) for p in points]
    workers = _workers()
    results = [None] * len(tasks)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, out in enumerate(pool.map(_one_correlate, tasks)):
                results[i] = out
    else:
        for i, task in enumerate(tasks):
            results[i] = _one_correlate(task)
    records = [r for r, _ in results]
    failures = [e for _, e in results if e is not None]
    emit(records, args.format, args.output, args.digits)
    return 2 if failures else 0


def cmd_static(args):
    records = []
    kind = _eps_kind(args.eps)
    thermal = ThermalParams(h=args.h, T=args.T)
    for x1 in parse_range(args.x1):
        for x2 in parse_range(args.x2):
            start = time.perf_counter()
            v = correlation_static(x1, x2, kind, thermal, n=args.n)
            ms = 1000.0 * (time.perf_counter() - start)
            flag = "dirichlet-null" if (kind is DIRICHLET and x1 == 0.0) else ""
            records.append(_record((x1, x2, 0.0, args.T, args.h, 0.0, args.eps),
                                   v, float("nan"), float("nan"), float("nan"),
                                   args.n, 0.0, (), flag, ms))
    emit(records, args.format, args.output, args.digits)
    return 0


def cmd_boundary(args):
    records = []
    thermal = ThermalParams(h=args.h, T=args.T)
    for x in parse_range(args.x):
        for t in parse_range(args.t):
            start = time.perf_counter()
            pt = PhysicalPoint(0.0, x, t, NEUMANN, thermal, D=args.D)
            v = correlation_boundary_neumann(x, t, pt, n=args.n,
                                             n_spectral=args.n_spectral,
                                             policy=build_policy(args))
            ms = 1000.0 * (time.perf_counter() - start)
            records.append(_record((0.0, x, t, args.T, args.h, args.D, "+"),
                                   v, float("nan"), float("nan"), float("nan"),
                                   args.n, 0.0, build_policy(args).deltas, "", ms))
    emit(records, args.format, args.output, args.digits)
    return 0


def cmd_density(args):
    records = []
    for T in parse_range(args.T):
        for h in parse_range(args.h):
            start = time.perf_counter()
            d = density_of_temperature(ThermalParams(h=h, T=T), n=args.n)
            ms = 1000.0 * (time.perf_counter() - start)
            records.append(_record((0.0, 0.0, 0.0, T, h, d, "+"), d, float("nan"),
                                   float("nan"), float("nan"), args.n, 0.0, (), "", ms))
    emit(records, args.format, args.output, args.digits)
    return 0


def cmd_kernel_dump(args):
    kind = _eps_kind(args.eps)
    thermal = ThermalParams(h=args.h, T=args.T)
    geom = GeometryParams(args.x1, args.x2, args.t)
    grid = np.linspace(args.a, args.b, args.n)
    name = args.kernel
    rows = ["i,j,lam,mu,re,im"]
    for i, lam in enumerate(grid):
        for j, mu in enumerate(grid):
            if name == "L":
                v = kernel_L(lam, mu, geom)
            elif name == "V":
                v = kernel_V(lam, mu, kind, geom)
            elif name == "W":
                v = complex(kernel_W(lam, mu, args.x2))
            elif name == "theta":
                v = complex(kernel_theta(lam, mu, kind, thermal))
            elif name == "K":
                v = complex(kernel_K_static(lam, mu, kind, math.pi * args.D))
            else:
                raise CliError(f"unknown kernel {name!r}")
            rows.append(f"{i},{j},{_fmt(lam, args.digits)},{_fmt(mu, args.digits)},"
                        f"{_fmt(v.real, args.digits)},{_fmt(v.imag, args.digits)}")
    try:
        out = open(args.output, "w") if args.output else sys.stdout
        try:
            out.write("\n".join(rows) + "\n")
        finally:
            if args.output:
                out.close()
    except OSError as exc:
        raise IOError(str(exc)) from exc
    return 0


def cmd_oracle(args):
    from .validate import oracle_checks

    report = oracle_checks(quick=not args.full)
    payload = {"suite": "oracle", "checks": report,
               "passed": all(c["passed"] for c in report)}
    text = json.dumps(payload, indent=1) + "\n"
    try:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        raise IOError(str(exc)) from exc
    return 0 if payload["passed"] else 2


def cmd_lax_check(args):
    from .nls_system import FourPointConfig, build_b, lax_compatibility_residual

    thermal = ThermalParams(h=args.h, T=args.T)
    pt = PhysicalPoint(0.5, 0.5, 0.0, NEUMANN, thermal, D=args.D if args.T == 0 else 0.0)
    cfg = FourPointConfig(y=tuple(args.y), t=tuple(args.tt))
    policy = build_policy(args)
    res_big = lax_compatibility_residual(cfg, pt, step=args.step, n=args.n, policy=policy)
    res_small = lax_compatibility_residual(cfg, pt, step=args.step / 2.0, n=args.n, policy=policy)
    mats = build_b(cfg, pt, n=args.n, policy=policy)
    payload = {
        "config": {"y": list(args.y), "t": list(args.tt), "T": args.T, "h": args.h, "D": args.D},
        "step": args.step,
        "residual_step": np.max(res_big),
        "residual_half_step": np.max(res_small),
        "ratio": float(np.max(res_big) / max(np.max(res_small), 1e-300)),
        "residual_matrix_step": res_big.tolist(),
        "b_re": np.real(mats.b).tolist(),
        "b_im": np.imag(mats.b).tolist(),
    }
    text = json.dumps(payload, indent=1) + "\n"
    try:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        raise IOError(str(exc)) from exc
    return 0


def cmd_validate(args):
    from .validate import run_suite

    report = run_suite(args.suite)
    payload = {"suite": args.suite, "checks": report,
               "passed": all(c["passed"] for c in report)}
    text = json.dumps(payload, indent=1) + "\n"
    try:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        raise IOError(str(exc)) from exc
    return 0 if payload["passed"] else 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _add_common(sub, n_default=64):
    sub.add_argument("--n", type=int, default=n_default, help="quadrature nodes")
    sub.add_argument("--damping", type=float, default=1e-2, help="largest damping delta")
    sub.add_argument("--orders", type=int, default=3, help="number of damping halvings")
    sub.add_argument("--tol", type=float, default=1e-14, help="truncation tolerance")
    sub.add_argument("--output", default="", help="output path (default stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--digits", type=int, default=15, help="significant digits")


def make_parser():
    parser = _Parser(prog="bosefredholm",
                     description="Impenetrable Bose gas wall correlators")
    subs = parser.add_subparsers(dest="command", required=True)

    c = subs.add_parser("correlate", help="dynamical correlator scan")
    c.add_argument("--eps", required=True)
    c.add_argument("--x1", required=True)
    c.add_argument("--x2", required=True)
    c.add_argument("--t", required=True)
    c.add_argument("--T", type=float, default=0.0)
    c.add_argument("--h", type=float, default=1.0)
    c.add_argument("--D", type=float, default=0.0)
    _add_common(c)
    c.set_defaults(func=cmd_correlate)

    s = subs.add_parser("static", help="equal-time correlator (first minor)")
    s.add_argument("--eps", required=True)
    s.add_argument("--x1", required=True)
    s.add_argument("--x2", required=True)
    s.add_argument("--T", type=float, default=0.0)
    s.add_argument("--h", type=float, default=1.0)
    _add_common(s)
    s.set_defaults(func=cmd_static)

    b = subs.add_parser("boundary", help="x1=0 Neumann route via the b matrix")
    b.add_argument("--x", required=True)
    b.add_argument("--t", required=True)
    b.add_argument("--T", type=float, default=0.0)
    b.add_argument("--h", type=float, default=1.0)
    b.add_argument("--D", type=float, default=0.0)
    b.add_argument("--n-spectral", type=int, default=32)
    _add_common(b)
    b.set_defaults(func=cmd_boundary)

    d = subs.add_parser("density", help="density D(T)")
    d.add_argument("--T", required=True)
    d.add_argument("--h", required=True)
    _add_common(d, n_default=400)
    d.set_defaults(func=cmd_density)

    k = subs.add_parser("kernel-dump", help="dump a kernel matrix to CSV")
    k.add_argument("--kernel", required=True, choices=("L", "V", "W", "theta", "K"))
    k.add_argument("--eps", default="+")
    k.add_argument("--x1", type=float, default=0.3)
    k.add_argument("--x2", type=float, default=0.9)
    k.add_argument("--t", type=float, default=0.0)
    k.add_argument("--T", type=float, default=0.5)
    k.add_argument("--h", type=float, default=1.0)
    k.add_argument("--D", type=float, default=1.0)
    k.add_argument("--a", type=float, default=0.0)
    k.add_argument("--b", type=float, default=3.0)
    _add_common(k, n_default=16)
    k.set_defaults(func=cmd_kernel_dump)

    o = subs.add_parser("oracle", help="finite-size oracle checks (JSON report)")
    o.add_argument("--full", action="store_true")
    o.add_argument("--output", default="")
    o.set_defaults(func=cmd_oracle)

    x = subs.add_parser("lax-check", help="Lax compatibility residuals")
    x.add_argument("--y", type=float, nargs=4, default=(0.15, 0.45, -0.35, 0.8))
    x.add_argument("--tt", type=float, nargs=4, default=(0.1, 0.32, -0.2, 0.55))
    x.add_argument("--step", type=float, default=2e-3)
    x.add_argument("--T", type=float, default=0.0)
    x.add_argument("--h", type=float, default=1.0)
    x.add_argument("--D", type=float, default=0.7)
    _add_common(x, n_default=16)
    x.set_defaults(func=cmd_lax_check)

    v = subs.add_parser("validate", help="invariant suite (JSON report)")
    v.add_argument("--suite", default="fast", choices=("fast", "all"))
    v.add_argument("--output", default="")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceFailure as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 2
    except IOError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except BoseFredholmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
