"""Fixed-step integrators: direct four-derivative stepping and RK-on-reduction.

`rkfd_integrate` advances (y, y′, y″, y‴) directly with an RkfdTableau;
`rk_integrate_reduced` rewrites y⁗ = f(x, y) as the first-order system
(y, v, u, w)′ = (v, u, w, f) and applies a standard explicit Runge-Kutta
method. Both count rhs evaluations identically (one per stage per step) and
return the same RunResult shape, so they can be compared head-to-head.
"""

import csv
import dataclasses
import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import BackendError  # re-exported convenience  # noqa: F401
from .problems import Ivp4
from .tableaux import RkfdTableau, RkTableau, convert_rk_to_rkfd

__all__ = [
    "BackendError",
    "DivergenceError",
    "State4",
    "RunResult",
    "step_count",
    "rkfd_step",
    "rkfd_integrate",
    "rk_integrate_reduced",
    "check_reduction_equivalence",
    "write_trajectory_csv",
]

_RK_ORDER3_TOL = 1e-12


class DivergenceError(RuntimeError):
    """A step produced a non-finite (overflowed) state."""

    def __init__(self, step_index, x, context=""):
        self.step_index = step_index
        self.x = x
        msg = f"non-finite state after step {step_index} (x = {x:.6g})"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


@dataclass(frozen=True)
class State4:
    """Solution state at one abscissa: y and its first three derivatives."""

    x: float
    y: np.ndarray
    dy: np.ndarray
    d2y: np.ndarray
    d3y: np.ndarray

    def __post_init__(self):
        vecs = {}
        for nm in ("y", "dy", "d2y", "d3y"):
            v = np.atleast_1d(np.asarray(getattr(self, nm), dtype=float))
            vecs[nm] = v
            object.__setattr__(self, nm, v)
        m = len(vecs["y"])
        if any(len(v) != m for v in vecs.values()):
            raise ValueError("state component lengths disagree")
        if not (math.isfinite(self.x)
                and all(np.isfinite(v).all() for v in vecs.values())):
            raise ValueError("state entries must be finite")

    @property
    def m(self):
        return len(self.y)


@dataclass
class RunResult:
    """One fixed-step integration: full trajectory plus accounting."""

    method: str
    problem: str
    backend: str
    h: float
    n_steps: int
    n_fevals: int
    xs: np.ndarray
    ys: np.ndarray
    dys: np.ndarray
    d2ys: np.ndarray
    d3ys: np.ndarray
    max_abs_error: float = None
    wall_seconds: float = None

    @property
    def m(self):
        return self.ys.shape[1]

    def state_at(self, k):
        return State4(self.xs[k], self.ys[k], self.dys[k], self.d2ys[k], self.d3ys[k])

    @property
    def final_state(self):
        return self.state_at(self.n_steps)

    @property
    def states(self):
        return [self.state_at(k) for k in range(self.n_steps + 1)]

    def sampled_states(self, stride=1):
        """Every stride-th grid state, always including both endpoints."""
        idx = list(range(0, self.n_steps + 1, max(1, int(stride))))
        if idx[-1] != self.n_steps:
            idx.append(self.n_steps)
        return [self.state_at(k) for k in idx]


def step_count(x0, x_end, h):
    """Number of fixed steps covering [x0, x_end] with the last one shortened.

    Interior grid points sit at x0 + k*h; the final step is trimmed to land
    exactly on x_end. A small relative slack keeps interval lengths that are
    an exact multiple of h from picking up a spurious extra step.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    span = x_end - x0
    if not span > 0:
        raise ValueError("integration interval must have positive length")
    return max(1, math.ceil(span / h - 1e-9))


def rkfd_step(tableau, f, state, h):
    """One direct step of size h from `state`; exactly s evaluations of f."""
    if not isinstance(tableau, RkfdTableau):
        raise TypeError("rkfd_step needs an RkfdTableau")
    if not tableau.explicit:
        raise ValueError(f"{tableau.name}: only explicit (strictly lower) "
                         "stage matrices are supported")
    if not h > 0:
        raise ValueError("h must be positive")
    c, a_hat = tableau.c, tableau.a_hat
    y, dy, d2y, d3y = state.y, state.dy, state.d2y, state.d3y
    s, m = tableau.s, state.m
    h2 = h * h
    h3 = h2 * h
    h4 = h3 * h
    F = np.empty((s, m))
    for i in range(s):
        ch = c[i] * h
        Y = (y + ch * dy + (0.5 * ch * ch) * d2y
             + (ch * ch * ch / 6.0) * d3y + h4 * (a_hat[i, :i] @ F[:i]))
        fi = np.asarray(f(state.x + ch, Y), dtype=float)
        if fi.shape != (m,):
            raise ValueError(f"f returned shape {fi.shape}, expected ({m},)")
        F[i] = fi
    y1 = y + h * dy + (h2 / 2.0) * d2y + (h3 / 6.0) * d3y + h4 * (tableau.b @ F)
    dy1 = dy + h * d2y + (h2 / 2.0) * d3y + h3 * (tableau.bp @ F)
    d2y1 = d2y + h * d3y + h2 * (tableau.bpp @ F)
    d3y1 = d3y + h * (tableau.bppp @ F)
    out = np.concatenate([y1, dy1, d2y1, d3y1])
    if not np.isfinite(out).all():
        raise DivergenceError(0, state.x + h, context=tableau.name)
    return State4(state.x + h, y1, dy1, d2y1, d3y1)


def _max_abs_error(problem, xs, ys):
    exact = np.empty_like(ys)
    for k in range(len(xs)):
        exact[k] = problem.exact(xs[k])
    return float(np.max(np.abs(ys - exact)))


def _drive(kind, method_name, tab_arrays, problem, h, backend):
    if not isinstance(problem, Ivp4):
        raise TypeError("problem must be an Ivp4")
    h = float(h)
    n = step_count(problem.x0, problem.x_end, h)
    plan = _kernels.plan_kernels(problem.f, backend)
    loop = plan.rkfd_loop if kind == "rkfd" else plan.rk_loop
    m = problem.m
    xs = np.empty(n + 1)
    ys = np.empty((n + 1, m))
    dys = np.empty((n + 1, m))
    d2ys = np.empty((n + 1, m))
    d3ys = np.empty((n + 1, m))
    # Copies: problem/tableau arrays are read-only, kernels take writable views.
    ics = (problem.y0.copy(), problem.dy0.copy(),
           problem.d2y0.copy(), problem.d3y0.copy())
    t0 = time.perf_counter()
    status = loop(plan.rhs, problem.x0, h, problem.x_end, n, *tab_arrays,
                  *ics, xs, ys, dys, d2ys, d3ys)
    wall = time.perf_counter() - t0
    if status >= 0:
        raise DivergenceError(status, xs[status + 1],
                              context=f"{method_name} on {problem.name}")
    s = len(tab_arrays[0])
    err = _max_abs_error(problem, xs, ys) if problem.has_exact else None
    return RunResult(method=method_name, problem=problem.name,
                     backend=plan.backend, h=h, n_steps=n, n_fevals=s * n,
                     xs=xs, ys=ys, dys=dys, d2ys=d2ys, d3ys=d3ys,
                     max_abs_error=err, wall_seconds=wall)


def rkfd_integrate(tableau, problem, h, backend=None):
    """Integrate `problem` over its interval with fixed steps of the tableau.

    The final step is shortened to land exactly on x_end. `max_abs_error` is
    the maximum over grid points and components of the absolute y-error,
    filled when the problem has an exact solution. `wall_seconds` times the
    stepping loop only.
    """
    if not isinstance(tableau, RkfdTableau):
        raise TypeError("rkfd_integrate needs an RkfdTableau")
    if not tableau.explicit:
        raise ValueError(f"{tableau.name}: only explicit (strictly lower) "
                         "stage matrices are supported")
    arrays = (tableau.c.copy(), tableau.a_hat.copy(), tableau.b.copy(),
              tableau.bp.copy(), tableau.bpp.copy(), tableau.bppp.copy())
    return _drive("rkfd", tableau.name, arrays, problem, h, backend)


def rk_integrate_reduced(rk, problem, h, backend=None):
    """Integrate via the first-order reduction (y, v, u, w)′ = (v, u, w, f).

    Only the w-slot calls f, so rhs evaluations count one per stage per step,
    directly comparable with `rkfd_integrate`. The reduction states are
    reported in the same (y, dy, d2y, d3y) slots.
    """
    if not isinstance(rk, RkTableau):
        raise TypeError("rk_integrate_reduced needs an RkTableau")
    arrays = (rk.c.copy(), rk.A.copy(), rk.b.copy())
    return _drive("rk", rk.name, arrays, problem, h, backend)


def check_reduction_equivalence(rk, problem, h, n_steps=None, backend=None):
    """Max discrepancy between the converted direct method and RK-on-reduction.

    For rhs depending on x only, running convert_rk_to_rkfd(rk) directly and
    running rk on the first-order reduction are algebraically the same
    computation; this returns the max absolute difference over all grid
    points, components, and derivative slots. Requires the rk method to have
    order ≥ 3 (bᵀe = 1, bᵀc = 1/2, bᵀAc = 1/6) and a problem whose rhs
    ignores y; both are checked.
    """
    if not isinstance(rk, RkTableau):
        raise TypeError("check_reduction_equivalence needs an RkTableau")
    if problem.depends_on_y:
        raise ValueError(
            f"{problem.name}: reduction equivalence holds only for rhs "
            "depending on x alone (build it with quadrature_problem)")
    c, A, b = rk.c, rk.A, rk.b
    residuals = (abs(float(np.sum(b)) - 1.0),
                 abs(float(b @ c) - 0.5),
                 abs(float(b @ (A @ c)) - 1.0 / 6.0))
    if max(residuals) > _RK_ORDER3_TOL:
        raise ValueError(f"{rk.name}: reduction equivalence needs an RK method "
                         "of order >= 3 (b·e = 1, b·c = 1/2, b·Ac = 1/6)")
    if n_steps is not None:
        if n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        problem = dataclasses.replace(problem, x_end=problem.x0 + n_steps * float(h))
    direct = rkfd_integrate(convert_rk_to_rkfd(rk), problem, h, backend=backend)
    reduced = rk_integrate_reduced(rk, problem, h, backend=backend)
    return float(max(
        np.max(np.abs(direct.ys - reduced.ys)),
        np.max(np.abs(direct.dys - reduced.dys)),
        np.max(np.abs(direct.d2ys - reduced.d2ys)),
        np.max(np.abs(direct.d3ys - reduced.d3ys)),
    ))


def write_trajectory_csv(result, path_or_file, problem=None,
                         include_errors=False, stride=1):
    """Dump a trajectory as CSV: x, y_1..y_m, dy_1.., d2y_1.., d3y_1...

    With include_errors=True (requires `problem` with an exact solution),
    appends abs_err_* and rel_err_* columns for the y slots. The relative
    error divides by |exact| with a tiny-denominator guard, so it is only
    meaningful where the exact solution is away from zero. `stride` keeps
    every stride-th row, always including both endpoints.
    """
    m = result.m
    header = ["x"]
    for prefix in ("y", "dy", "d2y", "d3y"):
        header += [f"{prefix}_{i + 1}" for i in range(m)]
    if include_errors:
        if problem is None or not problem.has_exact:
            raise ValueError("error columns need a problem with an exact solution")
        header += [f"abs_err_{i + 1}" for i in range(m)]
        header += [f"rel_err_{i + 1}" for i in range(m)]

    idx = list(range(0, result.n_steps + 1, max(1, int(stride))))
    if idx[-1] != result.n_steps:
        idx.append(result.n_steps)

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in idx:
            row = [repr(float(result.xs[k]))]
            for block in (result.ys, result.dys, result.d2ys, result.d3ys):
                row += [repr(float(v)) for v in block[k]]
            if include_errors:
                exact = np.asarray(problem.exact(result.xs[k]), dtype=float)
                abs_err = np.abs(result.ys[k] - exact)
                rel_err = abs_err / np.maximum(np.abs(exact), np.finfo(float).tiny)
                row += [repr(float(v)) for v in abs_err]
                row += [repr(float(v)) for v in rel_err]
            w.writerow(row)

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)
