"""Command-line front end: verify, integrate, converge, bench, convert, list-problems.

Exit codes: 0 success; 1 verification failure or divergence during a
requested run; 2 usage or input errors (unknown selectors, unreadable files,
bad flag values). `main(argv)` returns the exit code instead of raising
SystemExit, so it can be driven in-process.
"""

import argparse
import os
import sys
from dataclasses import dataclass

from .analysis import (bench, convergence_study, local_error_study,
                       render_points_table, write_bench_csv,
                       write_convergence_csv, write_gnuplot_script)
from .conditions import DEFAULT_TOLERANCE, evaluate_conditions
from .integrate import (BackendError, DivergenceError, rkfd_integrate,
                        rk_integrate_reduced, write_trajectory_csv)
from .problems import get_problem, problem_names
from .tableaux import (RkfdTableau, RkTableau, TableauError,
                       builtin_rk4, builtin_rkfd4_corrected,
                       builtin_rkfd4_printed, builtin_rkfd5,
                       convert_rk_to_rkfd, load_tableau, save_tableau)

__all__ = ["CliConfig", "main", "cmd_verify", "cmd_integrate", "cmd_converge",
           "cmd_bench", "cmd_convert", "cmd_list_problems"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

_BUILTIN_METHODS = {
    "rkfd4": builtin_rkfd4_corrected,
    "rkfd4-corrected": builtin_rkfd4_corrected,
    "rkfd4-printed": builtin_rkfd4_printed,
    "rkfd5": builtin_rkfd5,
    "rk4": builtin_rk4,
}

_BENCH_DEFAULT_METHODS = "rkfd4,rkfd5,rk4"
_LOCAL_DEFAULT_H_LIST = "0.2,0.1,0.05,0.025"


class _UsageError(Exception):
    pass


@dataclass
class CliConfig:
    """Parsed command line: one subcommand plus its resolved flag values."""

    subcommand: str
    methods: tuple = ()
    problems: tuple = ()
    h: float = None
    h0: float = None
    h_list: tuple = ()
    levels: int = 4
    tolerance: float = DEFAULT_TOLERANCE
    output: str = None
    format: str = "table"
    repeats: int = 5
    mode: str = "global"
    errors: bool = False
    stride: int = 1
    plot_script: str = None
    rk: str = None
    name: str = None
    backend: str = None


def _split_list(raw):
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def _parse_h_values(raw):
    try:
        values = tuple(float(part) for part in _split_list(raw))
    except ValueError:
        raise _UsageError(f"bad step-size list {raw!r}; expected comma-separated numbers")
    if not values:
        raise _UsageError("step-size list is empty")
    if any(not v > 0 for v in values):
        raise _UsageError("step sizes must be positive")
    return values


def _resolve_method(selector):
    key = selector.strip()
    factory = _BUILTIN_METHODS.get(key.lower())
    if factory is not None:
        return factory()
    if key.lower().endswith(".json") or os.sep in key or os.path.exists(key):
        return load_tableau(key)
    raise _UsageError(
        f"unknown method {selector!r}; builtins are "
        f"{', '.join(sorted(_BUILTIN_METHODS))}, or give a tableau JSON path")


def _resolve_problems(selectors):
    names = []
    for sel in selectors:
        if sel.lower() == "all":
            names.extend(["p1", "p2", "p3", "p4", "p5"])
        else:
            names.append(sel)
    out, seen = [], set()
    for nm in names:
        if nm in seen:
            continue
        seen.add(nm)
        try:
            out.append(get_problem(nm))
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
    if not out:
        raise _UsageError("no problems selected")
    return out


def _print_text(text, output):
    if output in (None, "-"):
        print(text)
    else:
        with open(output, "w") as fh:
            fh.write(text + "\n")


def _emit_csv(write_fn, output):
    if output in (None, "-"):
        write_fn(sys.stdout)
    else:
        with open(output, "w", newline="") as fh:
            write_fn(fh)


def _positive(value, what):
    if value is None or not value > 0:
        raise _UsageError(f"{what} must be positive")
    return float(value)


def cmd_verify(cfg):
    tableau = _resolve_method(cfg.methods[0])
    if not isinstance(tableau, RkfdTableau):
        raise _UsageError(f"{cfg.methods[0]!r} is not a direct-method tableau; "
                          "run `convert` on it first")
    if not cfg.tolerance > 0:
        raise _UsageError("tolerance must be positive")
    report = evaluate_conditions(tableau, tolerance=cfg.tolerance)
    if cfg.format == "csv":
        _emit_csv(report.write_csv, cfg.output)
    else:
        declared = ("undeclared" if tableau.declared_order is None
                    else str(tableau.declared_order))
        _print_text(f"tableau: {tableau.name} (declared order: {declared})\n"
                    + report.render_table(), cfg.output)
    required = 1 if tableau.declared_order is None else tableau.declared_order
    return EXIT_OK if report.attained_order >= required else EXIT_FAIL


def cmd_integrate(cfg):
    tableau = _resolve_method(cfg.methods[0])
    problem = _resolve_problems(cfg.problems)[0]
    h = _positive(cfg.h, "h")
    if cfg.stride < 1:
        raise _UsageError("stride must be >= 1")
    if cfg.errors and not problem.has_exact:
        raise _UsageError(f"{problem.name} has no exact solution; --errors unavailable")
    if isinstance(tableau, RkfdTableau):
        run = rkfd_integrate(tableau, problem, h, backend=cfg.backend)
    else:
        run = rk_integrate_reduced(tableau, problem, h, backend=cfg.backend)
    if cfg.format == "csv":
        _emit_csv(lambda fh: write_trajectory_csv(
            run, fh, problem=problem, include_errors=cfg.errors,
            stride=cfg.stride), cfg.output)
    else:
        err = ("n/a" if run.max_abs_error is None
               else f"{run.max_abs_error:.3e}")
        final = run.final_state
        y_txt = ", ".join(repr(float(v)) for v in final.y)
        _print_text(
            f"method={run.method} problem={run.problem} backend={run.backend}\n"
            f"h={run.h:g} steps={run.n_steps} fevals={run.n_fevals}\n"
            f"max_abs_error={err} wall_seconds={run.wall_seconds:.3e}\n"
            f"final x={final.x:g} y=[{y_txt}]", cfg.output)
    return EXIT_OK


def cmd_converge(cfg):
    tableau = _resolve_method(cfg.methods[0])
    problem = _resolve_problems(cfg.problems)[0]
    try:
        if cfg.mode == "local":
            hs = sorted(_parse_h_values(cfg.h_list or _LOCAL_DEFAULT_H_LIST),
                        reverse=True)
            report = local_error_study(tableau, problem, hs, backend=cfg.backend)
        else:
            if cfg.levels < 2:
                raise _UsageError("levels must be >= 2")
            if not problem.has_exact:
                raise _UsageError(f"{problem.name} has no exact solution; "
                                  "global convergence needs one")
            h0 = _positive(cfg.h0, "h0")
            report = convergence_study(tableau, problem, h0, cfg.levels,
                                       backend=cfg.backend)
    except DivergenceError:
        raise
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    if cfg.format == "csv":
        _emit_csv(lambda fh: write_convergence_csv(report, fh), cfg.output)
    else:
        _print_text(report.render_table(), cfg.output)
    return EXIT_OK


def cmd_bench(cfg):
    methods = [_resolve_method(sel) for sel in cfg.methods]
    problems = _resolve_problems(cfg.problems)
    if cfg.repeats < 1:
        raise _UsageError("repeats must be >= 1")
    points = bench(methods, problems, cfg.h_list, repeats=cfg.repeats,
                   backend=cfg.backend)
    if cfg.format == "csv":
        _emit_csv(lambda fh: write_bench_csv(points, fh), cfg.output)
    else:
        _print_text(render_points_table(points), cfg.output)
    if cfg.plot_script:
        with open(cfg.plot_script, "w") as fh:
            write_gnuplot_script(points, fh)
    return EXIT_FAIL if any(p.diverged for p in points) else EXIT_OK


def cmd_convert(cfg):
    source = _resolve_method(cfg.rk)
    if not isinstance(source, RkTableau):
        raise _UsageError(f"{cfg.rk!r} is not an rk tableau; convert expects "
                          "the builtin rk4 or a kind=\"rk\" JSON file")
    converted = convert_rk_to_rkfd(source, name=cfg.name)
    save_tableau(converted, cfg.output)
    print(f"wrote {cfg.output}: direct-method tableau {converted.name!r} "
          f"({converted.s} stages)")
    return EXIT_OK


def cmd_list_problems(cfg):
    lines = []
    for nm in problem_names():
        p = get_problem(nm)
        lines.append(f"{p.name:<8} m={p.m}  interval=[{p.x0:g}, {p.x_end:g}]  "
                     f"exact={'yes' if p.has_exact else 'no'}")
    _print_text("\n".join(lines), cfg.output)
    return EXIT_OK


_HANDLERS = {
    "verify": cmd_verify,
    "integrate": cmd_integrate,
    "converge": cmd_converge,
    "bench": cmd_bench,
    "convert": cmd_convert,
    "list-problems": cmd_list_problems,
}


def _add_common(p, fmt=True, out=True, backend=True):
    if fmt:
        p.add_argument("--format", choices=("table", "csv"), default="table")
    if out:
        p.add_argument("--out", default=None,
                       help="output path ('-' or omitted: stdout)")
    if backend:
        p.add_argument("--backend", choices=("auto", "numba", "numpy"),
                       default=None, help="override RKFD_BACKEND for this run")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rkfd",
        description="Direct one-step integration of y'''' = f(x, y): "
                    "tableau verification, integration, convergence and benchmarks.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("verify", help="check order conditions of a tableau")
    p.add_argument("--method", required=True)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    _add_common(p, backend=False)

    p = sub.add_parser("integrate", help="integrate one problem at fixed h")
    p.add_argument("--method", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--errors", action="store_true",
                   help="append abs/rel error columns to the trajectory CSV")
    p.add_argument("--stride", type=int, default=1,
                   help="keep every N-th trajectory row (endpoints always kept)")
    _add_common(p)

    p = sub.add_parser("converge", help="order study: global ladder or single-step")
    p.add_argument("--method", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--mode", choices=("global", "local"), default="global")
    p.add_argument("--h0", type=float, default=0.1,
                   help="largest step of the global ladder")
    p.add_argument("--levels", type=int, default=4,
                   help="number of halvings in the global ladder")
    p.add_argument("--h-list", default=None,
                   help=f"steps for local mode (default {_LOCAL_DEFAULT_H_LIST})")
    _add_common(p)

    p = sub.add_parser("bench", help="error/cost table over methods x problems x h")
    p.add_argument("--methods", default=_BENCH_DEFAULT_METHODS)
    p.add_argument("--problems", default="all")
    p.add_argument("--h-list", default="0.1,0.01")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--plot-script", default=None,
                   help="also write a gnuplot work-precision script here")
    _add_common(p)

    p = sub.add_parser("convert", help="turn an rk tableau into a direct-method one")
    p.add_argument("--rk", required=True, help="builtin rk4 or kind=\"rk\" JSON path")
    p.add_argument("--name", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("list-problems", help="available problems, one per line")
    p.add_argument("--out", default=None)

    return parser


def _config_from(ns):
    cfg = CliConfig(subcommand=ns.subcommand)
    if hasattr(ns, "method"):
        cfg.methods = (ns.method,)
    if hasattr(ns, "methods"):
        cfg.methods = _split_list(ns.methods)
        if not cfg.methods:
            raise _UsageError("method list is empty")
    if hasattr(ns, "problem"):
        cfg.problems = (ns.problem,)
    if hasattr(ns, "problems"):
        cfg.problems = _split_list(ns.problems)
    if hasattr(ns, "h"):
        cfg.h = ns.h
    if hasattr(ns, "h0"):
        cfg.h0 = ns.h0
    if hasattr(ns, "h_list"):
        if ns.subcommand == "bench":
            cfg.h_list = _parse_h_values(ns.h_list)
        else:
            cfg.h_list = ns.h_list
    for attr in ("levels", "tolerance", "format", "repeats", "mode", "errors",
                 "stride", "plot_script", "rk", "name", "backend"):
        if hasattr(ns, attr):
            setattr(cfg, attr, getattr(ns, attr))
    if hasattr(ns, "out"):
        cfg.output = ns.out
    return cfg


def main(argv=None):
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        cfg = _config_from(ns)
        return _HANDLERS[cfg.subcommand](cfg)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TableauError, BackendError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
