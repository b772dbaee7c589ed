"""Command-line front end.

Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
Output is CSV (17 significant digits) to ``--out`` or standard output.
"""
from __future__ import annotations

import argparse
import math
import os
import shlex
import sys
import warnings

from . import theory
from .deconv import (ESTIMATORS, FixedT, PivotExternal, PivotH, PivotHalf,
                     evaluate_curve, parse_grid)
from .errors import InvalidGrid, UnideconError
from .io import VERSION_STRING, read_curve, read_sample, write_curve, write_report, \
    write_rows, write_sample
from .kernels import KERNELS, deriv_power_integral, get_kernel, kernel_functionals, \
    validate_w1
from .montecarlo import McConfig, mise_study, pivot_mse_study, pointwise_study, \
    sample_convolution
from .rng import MASK64, StreamRNG


class UsageError(Exception):
    pass


def _positive(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _unit_interval(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"--t must lie in [0, 1], got {text}")
    return v


def _count(minimum):
    def parse(text):
        v = int(text)
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be an integer >= {minimum}, got {text}")
        return v
    return parse


def _seed(text):
    v = int(text, 0)
    if not 0 <= v <= MASK64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _points(text):
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text}")


def _grid(text):
    try:
        return parse_grid(text)
    except InvalidGrid as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unidecon",
                                description="Kernel estimators for uniform deconvolution.")
    p.add_argument("--version", action="version", version=VERSION_STRING)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sample=True):
        sp.add_argument("--kernel", default="biweight", choices=sorted(KERNELS))
        sp.add_argument("--out", default="-", help="output path, '-' for stdout")
        if sample:
            sp.add_argument("--model", choices=sorted(theory.MODELS))
            sp.add_argument("--n", type=_count(1))
            sp.add_argument("--seed", type=_seed, default=0)

    def weights(sp, default="half"):
        sp.add_argument("--weight", choices=["half", "H", "fixed", "external"],
                        default=default)
        sp.add_argument("--t", type=_unit_interval,
                        help="fixed weight on the left-shift estimate (weight=fixed)")
        sp.add_argument("--h-pivot", type=_positive)
        sp.add_argument("--pivot-curve", help="CSV curve for weight=external")

    s = sub.add_parser("simulate", help="draw a sample X = Y + Z")
    common(s)

    e = sub.add_parser("estimate", help="evaluate an estimator on a grid")
    common(e)
    weights(e)
    e.add_argument("--in", dest="inp", help="sample file (else simulate from --model)")
    e.add_argument("--h", type=_positive, required=True)
    e.add_argument("--estimator", choices=ESTIMATORS, required=True)
    e.add_argument("--grid", type=_grid, required=True, help="lo:hi:step")
    e.add_argument("--normalize", action="store_true",
                   help="clip density at zero and rescale to integral one")
    e.add_argument("--emit", choices=["gnuplot"])

    t = sub.add_parser("theory", help="asymptotic constants for a model")
    common(t, sample=False)
    t.add_argument("--model", choices=sorted(theory.MODELS), default="stdnormal")
    t.add_argument("--x", type=_points, default=(0.0,))
    t.add_argument("--t", type=_unit_interval)
    t.add_argument("--n", type=_count(2), default=500)
    t.add_argument("--h", type=_positive, default=1.0)

    for name, help_ in (("mc-point", "pointwise Monte Carlo study"),
                        ("mc-mise", "MISE Monte Carlo study"),
                        ("mc-pivot", "pivot MSE Monte Carlo study")):
        m = sub.add_parser(name, help=help_)
        common(m)
        weights(m, default="H" if name == "mc-mise" else "half")
        m.add_argument("--reps", type=_count(2), default=200)
        m.add_argument("--h", type=_positive, required=True)
        default_est = {"mc-point": "f-combined", "mc-mise": "f-combined",
                       "mc-pivot": "pivot-half"}[name]
        m.add_argument("--estimator", choices=ESTIMATORS, default=default_est)
        m.add_argument("--x", type=_points, default=())
        m.add_argument("--grid", type=_grid)

    k = sub.add_parser("kernel-info", help="kernel functionals and condition checks")
    common(k, sample=False)
    return p


def _weight(args):
    """Build the weight spec; any ``--t`` implies a fixed weight."""
    if args.t is not None or args.weight == "fixed":
        if args.t is None:
            raise UsageError("--weight fixed requires --t in [0, 1]")
        return FixedT(args.t)
    if args.estimator.endswith("-weighted"):
        raise UsageError(f"{args.estimator} requires --t in [0, 1]")
    if args.weight == "half":
        return PivotHalf()
    if args.weight == "H":
        return PivotH()
    if not args.pivot_curve:
        raise UsageError("--weight external requires --pivot-curve")
    return PivotExternal(read_curve(args.pivot_curve))


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires {', '.join(missing)}")


def _command_line(argv):
    return "unidecon " + " ".join(shlex.quote(a) for a in argv)


def _cmd_simulate(args, argv):
    _need(args, "model", "n")
    model = theory.get_model(args.model)
    s = sample_convolution(model, args.n, StreamRNG(args.seed, 0))
    write_sample(args.out, s.values, {"command": _command_line(argv), "model": args.model,
                                      "n": args.n, "seed": args.seed, "stream": 0})


def _cmd_estimate(args, argv):
    weight = _weight(args)
    if args.inp:
        s = read_sample(args.inp)
        source = {"input": args.inp}
    else:
        _need(args, "model", "n")
        s = sample_convolution(theory.get_model(args.model), args.n,
                               StreamRNG(args.seed, 0))
        source = {"model": args.model, "seed": args.seed, "stream": 0}
    curve = evaluate_curve(s, get_kernel(args.kernel), args.h, args.grid, args.estimator,
                           weight, args.h_pivot, normalize=args.normalize)
    write_curve(args.out, curve, {"command": _command_line(argv), **source})
    if args.emit == "gnuplot":
        if args.out == "-":
            raise UsageError("--emit gnuplot needs --out to be a file")
        with open(args.out + ".gp", "w", encoding="utf-8") as fh:
            fh.write("set datafile separator ','\n")
            fh.write("set key autotitle columnhead\n")
            fh.write(f"set title '{args.estimator}, h={args.h}'\n")
            fh.write(f"plot '{os.path.basename(args.out)}' using 1:2 with lines\n")


def _cmd_theory(args, argv):
    model = theory.get_model(args.model)
    k = get_kernel(args.kernel)
    n, h = args.n, args.h
    rows = []

    def add(q, x, v):
        rows.append({"quantity": q, "x": x, "value": v})

    for x in args.x:
        add("F", x, model.F(x))
        add("f", x, model.f(x))
        add("var_density_combined", x, theory.asymp_var_density_combined(model, x, n, h, k))
        add("var_cdf_combined", x, theory.asymp_var_cdf_combined(model, x, n, h, k))
        add("bias_density", x, theory.asymp_bias_density(model, x, h, k))
        add("bias_cdf", x, theory.asymp_bias_cdf(model, x, h, k))
        add("expected_estimate", x, theory.expected_estimate(model, k, h, x))
        if args.t is not None:
            add("var_density_t", x, theory.asymp_var_density_t(model, x, args.t, n, h, k))
            add("var_cdf_t", x, theory.asymp_var_cdf_t(model, x, args.t, n, h, k))
            add("even_moment_U_2", x, theory.even_moment_U(model, x, args.t, h, k, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            b, v, tot = theory.mise_expansion(model, n, h, k)
            add("mise_bias_term", "", b)
            add("mise_var_term", "", v)
            add("mise_total", "", tot)
            add("h_opt_density", "", theory.optimal_bandwidth_density(model, n, k))
        except theory.DegenerateModel:
            pass
        try:
            add("h_opt_cdf", "", theory.optimal_bandwidth_cdf(model, n, k))
        except theory.DegenerateModel:
            pass
    write_rows(args.out, rows, {"command": _command_line(argv), "model": args.model,
                                "kernel": k.name, "n": n, "h": h})


def _cmd_mc(args, argv):
    weight = _weight(args)
    _need(args, "model", "n")
    cfg = McConfig(args.model, args.n, args.reps, args.h, args.h_pivot, args.estimator,
                   weight, args.x, args.grid, args.seed, args.kernel)
    if args.command == "mc-point":
        if not args.x:
            raise UsageError("mc-point requires --x")
        report = pointwise_study(cfg)
    elif args.command == "mc-mise":
        report = mise_study(cfg)
    else:
        if not args.x and args.grid is None:
            raise UsageError("mc-pivot requires --x or --grid")
        report = pivot_mse_study(cfg)
    write_report(args.out, report, {"command": _command_line(argv)})


def _cmd_kernel_info(args, argv):
    k = get_kernel(args.kernel)
    m2, l2, dl2 = kernel_functionals(k)
    rows = [{"quantity": "m2", "value": m2}, {"quantity": "l2", "value": l2},
            {"quantity": "dl2", "value": dl2},
            {"quantity": "int_dw4", "value": deriv_power_integral(k, 4)}]
    report = validate_w1(k)
    rows += [{"quantity": f"check.{name}", "value": ok}
             for name, ok in report.checks.items()]
    write_rows(args.out, rows, {"command": _command_line(argv), "kernel": k.name})


COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "theory": _cmd_theory,
    "mc-point": _cmd_mc,
    "mc-mise": _cmd_mc,
    "mc-pivot": _cmd_mc,
    "kernel-info": _cmd_kernel_info,
}


_VALUE_FLAGS = ("--grid", "--x")


def _join_values(argv):
    """Turn ``--grid -4:4:1`` into ``--grid=-4:4:1``; argparse would read the
    leading minus as an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, argv)
    except (UsageError, InvalidGrid) as exc:
        print(f"unidecon {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (UnideconError, OSError, ValueError) as exc:
        print(f"unidecon {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
