"""Command-line front end: eval, envelope, verify, sweep, mc.

Exit codes: 0 pass, 1 verification failure, 2 usage or validation error,
3 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .bessel_kernel import FORMS, KernelParams, log_p2, log_p2_closed_zeta1, p2_gaussian_envelope
from .envelopes import ITEMS, regime_envelope, sharp_envelope
from .errors import ConfigError, DomainError, HypothesisError, QuadratureError
from .mc import mc_kernel
from .subordinated import p_alpha, p_alpha1_closed
from . import verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(x):
    return "%.17g" % x


def _emit(text, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _record(rec, form):
    """Render one flat record in plain, json or csv."""
    if form == "json":
        return json.dumps(verify._clean(rec), sort_keys=False) + "\n"
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(rec.keys())
        w.writerow([fmt(v) if isinstance(v, float) else v for v in rec.values()])
        return buf.getvalue()
    return " ".join(f"{k}={fmt(v) if isinstance(v, float) else v}" for k, v in rec.items()) + "\n"


def _params(args):
    p = KernelParams(args.zeta, args.alpha)   # raises DomainError naming the bound
    for name in ("t", "r", "s"):
        if hasattr(args, name) and not getattr(args, name) > 0:
            raise DomainError(f"{name} must be positive")
    return p


# --- eval -----------------------------------------------------------------


def _paths(p, t, r, s):
    """All evaluation paths available for these parameters, as {tag: thunk}."""
    out = {}
    if p.alpha == 2.0:
        out["alpha2"] = lambda: math.exp(log_p2(p.zeta, t, r, s))
        if p.zeta == 1.0:
            out["closed-form"] = lambda: math.exp(log_p2_closed_zeta1(t, r, s))
        return out
    if p.alpha == 1.0:
        out["closed-form"] = lambda: p_alpha1_closed(p.zeta, t, r, s)
    out["quadrature"] = lambda: p_alpha(p, t, r, s)
    return out


def cmd_eval(args):
    p = _params(args)
    paths = _paths(p, args.t, args.r, args.s)
    if args.method == "auto":
        tag = next(iter(paths))
        rec = {"value": paths[tag](), "method": tag}
        _emit(_record(rec, args.format), args.output)
        return EXIT_OK
    if args.method != "all":
        if args.method not in paths:
            raise UsageError(f"method {args.method} is not available for alpha={p.alpha:g}, zeta={p.zeta:g}")
        rec = {"value": paths[args.method](), "method": args.method}
        _emit(_record(rec, args.format), args.output)
        return EXIT_OK
    vals = {tag: f() for tag, f in paths.items()}
    v = list(vals.values())
    dev = max((abs(a - b) / max(abs(a), abs(b)) for a in v for b in v if max(abs(a), abs(b)) > 0), default=0.0)
    rec = {f"value[{k}]": x for k, x in vals.items()}
    rec["max_rel_dev"] = dev
    _emit(_record(rec, args.format), args.output)
    return EXIT_OK


# --- envelope ----------------------------------------------------------------


def cmd_envelope(args):
    p = _params(args)
    if p.alpha == 2.0:
        rec = {f"gaussian[{f}]": p2_gaussian_envelope(p.zeta, args.t, args.r, args.s, form=f) for f in FORMS}
    else:
        rec = {"sharp": sharp_envelope(p, args.t, args.r, args.s)}
        ev = regime_envelope(p, args.r / args.t ** (1.0 / p.alpha), args.s / args.t ** (1.0 / p.alpha))
        rec["regime"] = ev.value
        rec["regime_tag"] = ev.regime_tag
    _emit(_record(rec, args.format), args.output)
    return EXIT_OK


# --- verify --------------------------------------------------------------------


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise ConfigError(str(e), path)
    except json.JSONDecodeError as e:
        raise ConfigError(f"not valid JSON: {e}", path)


def cmd_verify(args):
    if args.config:
        config = _load_config(args.config)
    else:
        config = verify.SUITES[args.suite]()
    if args.seed is not None:
        config["seed"] = args.seed
    only = [o for chunk in args.only for o in chunk.split(",") if o] if args.only else None
    report = verify.run_suite(config, only)
    _emit(verify.dump_report(report), args.output)
    if args.csv:
        _emit(verify.report_csv(report), args.csv)
    if args.output not in (None, "-"):
        for c in report["checks"]:
            d = c["refinement_drift"]
            print(f"{c['status']:<7} {c['check_id']}  sup={verify.repr_num(c['sup_ratio'])} "
                  f"inf={verify.repr_num(c['inf_ratio'])} drift={'-' if d is None else verify.repr_num(d)}")
        print(f"suite {report['suite']}: {report['status']} ({report['n_checks']} checks)")
    return EXIT_OK if report["status"] == "pass" else EXIT_FAIL


# --- sweep -------------------------------------------------------------------------


def _chunk(spec):
    try:
        k, n = (int(x) for x in spec.split("/"))
    except ValueError:
        raise UsageError(f"--chunk expects k/K, got {spec!r}")
    if not 1 <= k <= n:
        raise UsageError("--chunk needs 1 <= k <= K")
    return k, n


def _range(spec):
    try:
        name, rng = spec.split("=")
        lo, hi = (float(x) for x in rng.split(":"))
    except ValueError:
        raise UsageError(f"--range expects name=min:max, got {spec!r}")
    return name, (lo, hi)


def cmd_sweep(args):
    chk, ranges = verify.make_check(args.check, args.zeta, args.alpha, args.item)
    for spec in args.range or []:
        name, rng = _range(spec)
        if name not in ranges:
            raise UsageError(f"unknown axis {name!r}; axes are {', '.join(ranges)}")
        ranges[name] = rng
    grid = verify.make_grid(ranges, args.count, args.level)
    pts = grid.points()
    n = grid.size
    k, parts = _chunk(args.chunk) if args.chunk else (1, 1)
    lo, hi = (n * (k - 1)) // parts, (n * k) // parts
    sub = {a: v[lo:hi] for a, v in pts.items()}
    num, den, mask = verify.evaluate(chk, sub)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(grid.names) + ["numerator", "denominator", "ratio"])
    with np.errstate(over="ignore", under="ignore"):
        for i in range(hi - lo):
            row = [fmt(sub[a][i]) for a in grid.names]
            if mask[i]:
                row += [fmt(math.exp(num[i])), fmt(math.exp(den[i])), fmt(math.exp(num[i] - den[i]))]
            else:
                row += ["", "", ""]
            w.writerow(row)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# --- mc ------------------------------------------------------------------------------


def cmd_mc(args):
    p = _params(args)
    if p.alpha == 2.0:
        raise DomainError("mc needs alpha < 2")
    if args.n < 1:
        raise DomainError("n must be >= 1")
    est = mc_kernel(p, args.t, args.r, args.s, args.n, args.seed)
    if p.alpha == 1.0:
        ref, tag = p_alpha1_closed(p.zeta, args.t, args.r, args.s), "closed-form"
    else:
        ref, tag = p_alpha(p, args.t, args.r, args.s), "quadrature"
    rec = {
        "mean": est.mean,
        "std_error": est.std_error,
        "n": est.n,
        "seed": est.seed,
        "status": est.status,
        "reference": ref,
        "reference_method": tag,
        "z_score": est.z_score(ref),
    }
    _emit(_record(rec, args.format), args.output)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------------


def _point_flags(p, alpha_default=2.0):
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--alpha", type=float, default=alpha_default)
    for name in ("t", "r", "s"):
        p.add_argument(f"--{name}", type=float, required=True)


def _out_flags(p, formats=("plain", "json", "csv")):
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--output", "-o", default=None, help="path, or - for stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="subbessel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the kernel at one point")
    _point_flags(p)
    p.add_argument("--method", choices=("auto", "quadrature", "closed-form", "alpha2", "all"), default="auto")
    _out_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("envelope", help="envelope values at one point")
    _point_flags(p)
    _out_flags(p)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("verify", help="run a verification suite")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--suite", choices=sorted(verify.SUITES), default="smoke")
    g.add_argument("--config", help="JSON config file")
    p.add_argument("--only", action="append", help="run only checks whose type or id matches (repeatable, comma lists)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", "-o", default="verify_report.json", help="JSON report path, or - for stdout")
    p.add_argument("--csv", default=None, help="also write the one-row-per-check CSV here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="CSV of (point, numerator, denominator, ratio) over a grid")
    p.add_argument("--check", choices=verify.SWEEP_KINDS, required=True)
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--item", choices=ITEMS, default=None)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--range", action="append", help="override an axis: name=min:max")
    p.add_argument("--chunk", default=None, help="k/K: emit only the k-th of K equal row blocks")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mc", help="Monte Carlo estimate against quadrature")
    _point_flags(p, alpha_default=1.0)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=7)
    _out_flags(p)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, HypothesisError, ConfigError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as e:
        where = f" at {e.point}" if e.point is not None else ""
        print(f"numerical failure: {e}{where}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, ArithmeticError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
