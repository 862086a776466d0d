"""Backend selection and pure-numpy integration loop kernels.

Two interchangeable backends drive the integrators:

- "numpy": the reference loops below, plain numpy, always available.
- "numba": compiled twins in `_numba_kernels` (imported lazily), used for
  right-hand sides that compile under numba's nopython mode.

The backend is chosen per run via the RKFD_BACKEND environment variable or an
explicit `backend=` argument: "auto" (default) uses numba when it is
importable and the rhs compiles, falling back to numpy per-problem otherwise;
"numba" and "numpy" force the respective backend ("numba" raises BackendError
when it cannot be honoured).

Both backends share one kernel contract, documented in `_numba_kernels`.
"""

import os

import numpy as np

__all__ = [
    "BACKEND_ENV",
    "BACKEND_CHOICES",
    "BackendError",
    "KernelPlan",
    "numba_available",
    "plan_kernels",
    "requested_backend",
    "rkfd_loop_numpy",
    "rk_reduction_loop_numpy",
]

BACKEND_ENV = "RKFD_BACKEND"
BACKEND_CHOICES = ("auto", "numba", "numpy")


class BackendError(RuntimeError):
    """A requested backend cannot be provided."""


def rkfd_loop_numpy(f, x0, h, xe, n, c, a_hat, b, bp, bpp, bppp,
                    y0, dy0, d2y0, d3y0, xs, ys, dys, d2ys, d3ys):
    s = len(c)
    y = y0.copy()
    dy = dy0.copy()
    d2y = d2y0.copy()
    d3y = d3y0.copy()
    xs[0] = x0
    ys[0] = y
    dys[0] = dy
    d2ys[0] = d2y
    d3ys[0] = d3y
    F = np.empty((s, len(y0)))
    for k in range(n):
        x = x0 + k * h
        hk = (xe - x) if k == n - 1 else h
        h2 = hk * hk
        h3 = h2 * hk
        h4 = h3 * hk
        for i in range(s):
            ch = c[i] * hk
            Y = (y + ch * dy + (0.5 * ch * ch) * d2y
                 + (ch * ch * ch / 6.0) * d3y + h4 * (a_hat[i, :i] @ F[:i]))
            F[i] = f(x + ch, Y)
        y = y + hk * dy + (h2 / 2.0) * d2y + (h3 / 6.0) * d3y + h4 * (b @ F)
        dy = dy + hk * d2y + (h2 / 2.0) * d3y + h3 * (bp @ F)
        d2y = d2y + hk * d3y + h2 * (bpp @ F)
        d3y = d3y + hk * (bppp @ F)
        xs[k + 1] = xe if k == n - 1 else x0 + (k + 1) * h
        ys[k + 1] = y
        dys[k + 1] = dy
        d2ys[k + 1] = d2y
        d3ys[k + 1] = d3y
        if not (np.isfinite(y).all() and np.isfinite(dy).all()
                and np.isfinite(d2y).all() and np.isfinite(d3y).all()):
            return k
    return -1


def rk_reduction_loop_numpy(f, x0, h, xe, n, c, A, b,
                            y0, dy0, d2y0, d3y0, xs, ys, dys, d2ys, d3ys):
    s = len(c)
    m = len(y0)
    u = np.concatenate([y0, dy0, d2y0, d3y0])
    xs[0] = x0
    ys[0] = u[:m]
    dys[0] = u[m:2 * m]
    d2ys[0] = u[2 * m:3 * m]
    d3ys[0] = u[3 * m:]
    K = np.empty((s, 4 * m))
    for k in range(n):
        x = x0 + k * h
        hk = (xe - x) if k == n - 1 else h
        for i in range(s):
            U = u + hk * (A[i, :i] @ K[:i])
            K[i, :3 * m] = U[m:]
            K[i, 3 * m:] = f(x + c[i] * hk, U[:m])
        u = u + hk * (b @ K)
        xs[k + 1] = xe if k == n - 1 else x0 + (k + 1) * h
        ys[k + 1] = u[:m]
        dys[k + 1] = u[m:2 * m]
        d2ys[k + 1] = u[2 * m:3 * m]
        d3ys[k + 1] = u[3 * m:]
        if not np.isfinite(u).all():
            return k
    return -1


def requested_backend(override=None):
    """Resolve the backend request string ("auto"/"numba"/"numpy")."""
    choice = override if override is not None else os.environ.get(BACKEND_ENV, "auto")
    choice = (choice or "auto").strip().lower()
    if choice not in BACKEND_CHOICES:
        raise BackendError(
            f"unknown backend {choice!r}; choose one of {', '.join(BACKEND_CHOICES)}")
    return choice


_numba_state = {"checked": False, "ok": False}


def numba_available():
    if not _numba_state["checked"]:
        try:
            import numba  # noqa: F401
            _numba_state["ok"] = True
        except Exception:
            _numba_state["ok"] = False
        _numba_state["checked"] = True
    return _numba_state["ok"]


_jitted_rhs = {}


def _jit_rhs(f):
    """Compile f under nopython mode, or return None if it will not compile."""
    if f in _jitted_rhs:
        return _jitted_rhs[f]
    from numba import njit
    from ._numba_kernels import RHS_SIGNATURE
    compiled = None
    for cache in (True, False):
        try:
            compiled = njit(RHS_SIGNATURE, nogil=True, cache=cache)(f)
            break
        except Exception:
            compiled = None
    _jitted_rhs[f] = compiled
    return compiled


class KernelPlan:
    """Concrete loops plus the rhs to feed them, for one problem/backend."""

    __slots__ = ("backend", "rkfd_loop", "rk_loop", "rhs")

    def __init__(self, backend, rkfd_loop, rk_loop, rhs):
        self.backend = backend
        self.rkfd_loop = rkfd_loop
        self.rk_loop = rk_loop
        self.rhs = rhs


def plan_kernels(f, backend=None):
    """Pick loops and prepare the rhs for them.

    `backend` overrides the RKFD_BACKEND environment variable when given.
    """
    choice = requested_backend(backend)
    if choice in ("auto", "numba"):
        if numba_available():
            rhs = _jit_rhs(f)
            if rhs is not None:
                from . import _numba_kernels as nk
                return KernelPlan("numba", nk.rkfd_loop, nk.rk_reduction_loop, rhs)
            if choice == "numba":
                raise BackendError(
                    f"rhs {getattr(f, '__name__', f)!r} does not compile under "
                    "the numba backend; use backend 'auto' or 'numpy'")
        elif choice == "numba":
            raise BackendError("numba backend requested but numba is not importable")
    return KernelPlan("numpy", rkfd_loop_numpy, rk_reduction_loop_numpy, f)
