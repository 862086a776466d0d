"""Order estimation, convergence studies, work-precision curves, benchmarks.

Conventions shared by everything here:

- Errors at or below ROUNDOFF_FLOOR are treated as pure 64-bit accumulation
  noise: they are excluded from order estimates and least-squares fits.
- Observed order between two (h, error) points is ln(e1/e2)/ln(h1/h2).
- Timing measures the stepping loop only (see `integrate`); benchmark cells
  run serially and report the median wall time over repeats. Untimed studies
  may fan out across threads when RKFD_THREADS is set above 1.
"""

import csv
import dataclasses
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .integrate import DivergenceError, rkfd_integrate, rk_integrate_reduced, step_count
from .problems import Ivp4
from .tableaux import RkfdTableau, RkTableau, builtin_rk4

__all__ = [
    "ROUNDOFF_FLOOR",
    "THREADS_ENV",
    "ConvergenceReport",
    "EfficiencyPoint",
    "observed_order",
    "local_error_study",
    "convergence_study",
    "efficiency_curve",
    "bench",
    "write_convergence_csv",
    "write_bench_csv",
    "write_gnuplot_script",
    "render_points_table",
]

ROUNDOFF_FLOOR = 1e-13
THREADS_ENV = "RKFD_THREADS"

_LOCAL_REF_REFINE = 1000


def observed_order(e1, e2, h1, h2, floor=ROUNDOFF_FLOOR):
    """ln(e1/e2)/ln(h1/h2), or None when either error is roundoff-dominated.

    Raises ValueError for non-positive or equal step sizes; returns None (the
    undefined-order signal) when either error is at or below `floor`.
    """
    if not (h1 > 0 and h2 > 0):
        raise ValueError("step sizes must be positive")
    if h1 == h2:
        raise ValueError("step sizes must differ")
    if e1 <= floor or e2 <= floor:
        return None
    return math.log(e1 / e2) / math.log(h1 / h2)


def _ls_slope(hs, errs, floor):
    pts = [(math.log(h), math.log(e)) for h, e in zip(hs, errs) if e > floor]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def _pairwise_orders(hs, errs, floor):
    return [observed_order(errs[i], errs[i + 1], hs[i], hs[i + 1], floor=floor)
            for i in range(len(hs) - 1)]


@dataclass
class ConvergenceReport:
    """Errors over a decreasing h ladder with order estimates.

    `points` pairs each h with its error; `orders` holds the pairwise
    observed orders (None where roundoff-dominated), one entry fewer than
    `points`; `slope` is the least-squares slope of log(error) vs log(h) over
    above-floor points. For local (single-step) studies, `slot_errors` also
    records per-slot errors measured against the reference state.
    """

    method: str
    problem: str
    points: list
    orders: list
    slope: float
    kind: str = "global"
    slot_errors: dict = field(default_factory=dict)

    def __post_init__(self):
        hs = [h for h, _ in self.points]
        if any(not hs[i] > hs[i + 1] for i in range(len(hs) - 1)):
            raise ValueError("h values must be strictly decreasing")
        if len(self.orders) != max(0, len(self.points) - 1):
            raise ValueError("orders must have one entry per adjacent h pair")

    @property
    def hs(self):
        return [h for h, _ in self.points]

    @property
    def errors(self):
        return [e for _, e in self.points]

    def render_table(self):
        label = "single-step" if self.kind == "local" else "global"
        lines = [f"{label} convergence: method={self.method} problem={self.problem}",
                 f"{'h':>12}  {'error':>12}  {'observed_order':>14}"]
        for i, (h, e) in enumerate(self.points):
            o = "" if i == 0 or self.orders[i - 1] is None else f"{self.orders[i - 1]:.3f}"
            lines.append(f"{h:>12g}  {e:>12.3e}  {o:>14}")
        slope = "undefined (roundoff)" if self.slope is None else f"{self.slope:.3f}"
        lines.append(f"least-squares slope: {slope}")
        return "\n".join(lines)


@dataclass(frozen=True)
class EfficiencyPoint:
    """One work-precision sample: cost (fevals, wall time) vs achieved error."""

    method: str
    problem: str
    h: float
    n_steps: int
    n_fevals: int
    max_abs_error: float
    wall_seconds: float
    diverged: bool = False
    note: str = ""


def _threads():
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    if _threads() == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        return list(ex.map(fn, items))


def _integrate_any(method, problem, h, backend=None):
    if isinstance(method, RkfdTableau):
        return rkfd_integrate(method, problem, h, backend=backend)
    if isinstance(method, RkTableau):
        return rk_integrate_reduced(method, problem, h, backend=backend)
    raise TypeError(f"method must be an RkfdTableau or RkTableau, got {type(method).__name__}")


def _validate_h_ladder(h_list):
    hs = [float(h) for h in h_list]
    if not hs:
        raise ValueError("h list must be non-empty")
    if any(not h > 0 for h in hs):
        raise ValueError("step sizes must be positive")
    if any(not hs[i] > hs[i + 1] for i in range(len(hs) - 1)):
        raise ValueError("h list must be strictly decreasing")
    return hs


def local_error_study(method, problem, h_list, backend=None):
    """Single-step error from the initial state at each h, with order fit.

    The headline error (in `points`) is the y-slot error against the exact
    solution when available, else against a reference computed by RK4 on the
    first-order reduction with 1000 substeps. `slot_errors` reports all four
    slots against the reference state. Local error of an order-p method
    scales as h^(p+1), so the fitted slope estimates p+1.
    """
    hs = _validate_h_ladder(h_list)
    span = problem.x_end - problem.x0
    if hs[0] > span * (1 + 1e-12):
        raise ValueError("a single step of the largest h leaves the problem interval")
    rk_ref = builtin_rk4()

    def cell(h):
        short = dataclasses.replace(problem, x_end=problem.x0 + h)
        one = _integrate_any(method, short, h, backend=backend).final_state
        ref = rk_integrate_reduced(
            rk_ref, short, h / _LOCAL_REF_REFINE, backend=backend).final_state
        slot = {
            "y": float(np.max(np.abs(one.y - ref.y))),
            "dy": float(np.max(np.abs(one.dy - ref.dy))),
            "d2y": float(np.max(np.abs(one.d2y - ref.d2y))),
            "d3y": float(np.max(np.abs(one.d3y - ref.d3y))),
        }
        if problem.has_exact:
            head = float(np.max(np.abs(one.y - np.asarray(problem.exact(one.x), dtype=float))))
        else:
            head = slot["y"]
        return head, slot

    results = _map_ordered(cell, hs)
    errs = [r[0] for r in results]
    slots = {k: [r[1][k] for r in results] for k in ("y", "dy", "d2y", "d3y")}
    name = method.name if hasattr(method, "name") else str(method)
    return ConvergenceReport(
        method=name, problem=problem.name, points=list(zip(hs, errs)),
        orders=_pairwise_orders(hs, errs, ROUNDOFF_FLOOR),
        slope=_ls_slope(hs, errs, ROUNDOFF_FLOOR), kind="local", slot_errors=slots)


def convergence_study(method, problem, h0, levels, backend=None):
    """Full-interval error at h0, h0/2, ..., h0/2^(levels-1), with order fit.

    Requires an exact solution; a divergent run aborts the whole study,
    naming the offending h.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if not problem.has_exact:
        raise ValueError(f"{problem.name} has no exact solution to measure against")
    hs = [float(h0) / 2 ** i for i in range(levels)]

    def cell(h):
        try:
            return _integrate_any(method, problem, h, backend=backend).max_abs_error
        except DivergenceError as exc:
            raise DivergenceError(exc.step_index, exc.x,
                                  context=f"convergence study aborted at h={h:g}") from exc

    errs = _map_ordered(cell, hs)
    name = method.name if hasattr(method, "name") else str(method)
    return ConvergenceReport(
        method=name, problem=problem.name, points=list(zip(hs, errs)),
        orders=_pairwise_orders(hs, errs, ROUNDOFF_FLOOR),
        slope=_ls_slope(hs, errs, ROUNDOFF_FLOOR), kind="global")


def _point_from_run(method, problem, h, backend, wall=None):
    try:
        run = _integrate_any(method, problem, h, backend=backend)
    except DivergenceError as exc:
        name = method.name if hasattr(method, "name") else str(method)
        return EfficiencyPoint(
            method=name, problem=problem.name, h=float(h),
            n_steps=step_count(problem.x0, problem.x_end, h), n_fevals=None,
            max_abs_error=None, wall_seconds=None, diverged=True, note=str(exc))
    return EfficiencyPoint(
        method=run.method, problem=run.problem, h=run.h, n_steps=run.n_steps,
        n_fevals=run.n_fevals, max_abs_error=run.max_abs_error,
        wall_seconds=run.wall_seconds if wall is None else wall)


def efficiency_curve(method, problem, h_list, backend=None):
    """One full integration per h; points ordered by decreasing h.

    Divergence is recorded on the affected point (diverged=True, empty cost
    and error fields) without failing the rest of the curve.
    """
    if not h_list:
        raise ValueError("h list must be non-empty")
    hs = sorted({float(h) for h in h_list}, reverse=True)
    if any(not h > 0 for h in hs):
        raise ValueError("step sizes must be positive")
    return [_point_from_run(method, problem, h, backend) for h in hs]


def bench(methods, problems, h_list, repeats=5, backend=None):
    """Every (method, problem, h) cell, wall time = median over `repeats`.

    Cells run serially (timing should not contend) after one untimed warmup
    run per cell; all non-timing fields come from the warmup run, so repeated
    invocations differ only in wall_seconds. Rows are ordered by
    (method, problem, h).
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    methods = list(methods)
    problems = list(problems)
    hs = [float(h) for h in h_list]
    if not (methods and problems and hs):
        raise ValueError("methods, problems and h list must all be non-empty")
    name_of = {id(m): (m.name if hasattr(m, "name") else str(m)) for m in methods}
    cells = sorted(
        ((m, p, h) for m in methods for p in problems for h in hs),
        key=lambda cell: (name_of[id(cell[0])], cell[1].name, cell[2]))
    points = []
    for m, p, h in cells:
        point = _point_from_run(m, p, h, backend)
        if not point.diverged:
            walls = [_integrate_any(m, p, h, backend=backend).wall_seconds
                     for _ in range(repeats)]
            point = dataclasses.replace(point, wall_seconds=statistics.median(walls))
        points.append(point)
    return points


def _csv_num(value):
    return "" if value is None else repr(float(value))


def _emit(path_or_file, writer_fn):
    if hasattr(path_or_file, "write"):
        writer_fn(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            writer_fn(fh)


def write_convergence_csv(report, path_or_file):
    """Columns: method, problem, h, error, observed_order (first row empty)."""
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "problem", "h", "error", "observed_order"])
        for i, (h, e) in enumerate(report.points):
            order = None if i == 0 else report.orders[i - 1]
            w.writerow([report.method, report.problem,
                        _csv_num(h), _csv_num(e), _csv_num(order)])
    _emit(path_or_file, emit)


def write_bench_csv(points, path_or_file):
    """Columns: method, problem, h, steps, fevals, max_error, wall_seconds."""
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "problem", "h", "steps", "fevals",
                    "max_error", "wall_seconds"])
        for p in points:
            w.writerow([p.method, p.problem, _csv_num(p.h),
                        "" if p.n_steps is None else p.n_steps,
                        "" if p.n_fevals is None else p.n_fevals,
                        _csv_num(p.max_abs_error), _csv_num(p.wall_seconds)])
    _emit(path_or_file, emit)


def _gnuplot_ident(name):
    ident = "".join(ch if ch.isalnum() else "_" for ch in name)
    return ident if ident and not ident[0].isdigit() else "m_" + ident


def write_gnuplot_script(points, path_or_file):
    """Gnuplot script: log10(max error) vs log10(fevals), one curve per method.

    Data rides inline in heredoc blocks, so the script is self-contained.
    Points with no finite positive error (diverged or exactly-zero error) are
    skipped.
    """
    curves = {}
    for p in points:
        if p.diverged or not p.n_fevals or not p.max_abs_error:
            continue
        curves.setdefault(p.method, []).append((p.n_fevals, p.max_abs_error))

    def emit(fh):
        fh.write("# work-precision curves: log10(max abs error) vs log10(rhs evaluations)\n")
        fh.write('set xlabel "log10(fevals)"\n')
        fh.write('set ylabel "log10(max abs error)"\n')
        fh.write("set key top right\nset grid\n")
        plot_parts = []
        for method, data in curves.items():
            ident = "d_" + _gnuplot_ident(method)
            fh.write(f"${ident} << EOD\n")
            for fev, err in sorted(data):
                fh.write(f"{math.log10(fev):.6f} {math.log10(err):.6f}\n")
            fh.write("EOD\n")
            plot_parts.append(f'${ident} using 1:2 with linespoints title "{method}"')
        if plot_parts:
            fh.write("plot " + ", \\\n     ".join(plot_parts) + "\n")
        else:
            fh.write("# no plottable points\n")
    _emit(path_or_file, emit)


def render_points_table(points):
    """Human-readable table of EfficiencyPoints (errors to 3 significant digits)."""
    header = (f"{'method':<14} {'problem':<10} {'h':>10} {'steps':>7} "
              f"{'fevals':>8} {'max_error':>11} {'wall_seconds':>12}")
    lines = [header]
    for p in points:
        err = "diverged" if p.diverged else (
            "" if p.max_abs_error is None else f"{p.max_abs_error:.3e}")
        wall = "" if p.wall_seconds is None else f"{p.wall_seconds:.3e}"
        fev = "" if p.n_fevals is None else str(p.n_fevals)
        lines.append(f"{p.method:<14} {p.problem:<10} {p.h:>10g} {p.n_steps:>7} "
                     f"{fev:>8} {err:>11} {wall:>12}")
    return "\n".join(lines)
