"""Compiled fixed-step integration loops.

Import this module only when the accelerated backend is wanted: importing it
pulls in numba and compiles (or loads from the on-disk cache) the two loop
kernels below. Both kernels take the right-hand side as a first-class
function argument with a fixed signature, so they compile once and are reused
across every problem whose rhs compiles.

Contract shared with the pure-numpy twins in `_kernels`:

- the grid is x_k = x0 + k*h for k < n, with the final point forced to xe;
- trajectory arrays (xs, ys, dys, d2ys, d3ys) are written in place, row k
  holding the state at x_k;
- the return value is -1 on success, or the 0-based index of the first step
  that produced a non-finite state (that step's row is still written).
"""

import numpy as np
from numba import njit, types

RHS_SIGNATURE = types.float64[::1](types.float64, types.float64[::1])
RHS_TYPE = types.FunctionType(RHS_SIGNATURE)

_F = types.float64
_I = types.int64
_V = types.float64[::1]
_M = types.float64[:, ::1]

_RKFD_SIG = _I(RHS_TYPE, _F, _F, _F, _I,
               _V, _M, _V, _V, _V, _V,
               _V, _V, _V, _V,
               _V, _M, _M, _M, _M)

_RK_SIG = _I(RHS_TYPE, _F, _F, _F, _I,
             _V, _M, _V,
             _V, _V, _V, _V,
             _V, _M, _M, _M, _M)


@njit(_RKFD_SIG, cache=True, nogil=True)
def rkfd_loop(f, x0, h, xe, n, c, a_hat, b, bp, bpp, bppp,
              y0, dy0, d2y0, d3y0, xs, ys, dys, d2ys, d3ys):
    s = c.shape[0]
    m = y0.shape[0]
    y = y0.copy()
    dy = dy0.copy()
    d2y = d2y0.copy()
    d3y = d3y0.copy()
    xs[0] = x0
    for p in range(m):
        ys[0, p] = y[p]
        dys[0, p] = dy[p]
        d2ys[0, p] = d2y[p]
        d3ys[0, p] = d3y[p]
    F = np.empty((s, m))
    Y = np.empty(m)
    for k in range(n):
        x = x0 + k * h
        hk = h
        if k == n - 1:
            hk = xe - x
        h2 = hk * hk
        h3 = h2 * hk
        h4 = h3 * hk
        for i in range(s):
            ch = c[i] * hk
            for p in range(m):
                acc = 0.0
                for j in range(i):
                    acc += a_hat[i, j] * F[j, p]
                Y[p] = (y[p] + ch * dy[p] + 0.5 * ch * ch * d2y[p]
                        + ch * ch * ch / 6.0 * d3y[p] + h4 * acc)
            Fi = f(x + ch, Y)
            for p in range(m):
                F[i, p] = Fi[p]
        ok = True
        for p in range(m):
            sy = 0.0
            sdy = 0.0
            sd2 = 0.0
            sd3 = 0.0
            for i in range(s):
                Fi = F[i, p]
                sy += b[i] * Fi
                sdy += bp[i] * Fi
                sd2 += bpp[i] * Fi
                sd3 += bppp[i] * Fi
            y[p] += hk * dy[p] + 0.5 * h2 * d2y[p] + h3 / 6.0 * d3y[p] + h4 * sy
            dy[p] += hk * d2y[p] + 0.5 * h2 * d3y[p] + h3 * sdy
            d2y[p] += hk * d3y[p] + h2 * sd2
            d3y[p] += hk * sd3
            if not (np.isfinite(y[p]) and np.isfinite(dy[p])
                    and np.isfinite(d2y[p]) and np.isfinite(d3y[p])):
                ok = False
        xn = x0 + (k + 1) * h
        if k == n - 1:
            xn = xe
        xs[k + 1] = xn
        for p in range(m):
            ys[k + 1, p] = y[p]
            dys[k + 1, p] = dy[p]
            d2ys[k + 1, p] = d2y[p]
            d3ys[k + 1, p] = d3y[p]
        if not ok:
            return k
    return -1


@njit(_RK_SIG, cache=True, nogil=True)
def rk_reduction_loop(f, x0, h, xe, n, c, A, b,
                      y0, dy0, d2y0, d3y0, xs, ys, dys, d2ys, d3ys):
    s = c.shape[0]
    m = y0.shape[0]
    m4 = 4 * m
    u = np.empty(m4)
    for p in range(m):
        u[p] = y0[p]
        u[m + p] = dy0[p]
        u[2 * m + p] = d2y0[p]
        u[3 * m + p] = d3y0[p]
    xs[0] = x0
    for p in range(m):
        ys[0, p] = u[p]
        dys[0, p] = u[m + p]
        d2ys[0, p] = u[2 * m + p]
        d3ys[0, p] = u[3 * m + p]
    K = np.empty((s, m4))
    U = np.empty(m4)
    yb = np.empty(m)
    for k in range(n):
        x = x0 + k * h
        hk = h
        if k == n - 1:
            hk = xe - x
        for i in range(s):
            for q in range(m4):
                acc = 0.0
                for j in range(i):
                    acc += A[i, j] * K[j, q]
                U[q] = u[q] + hk * acc
            # (y, v, u, w)' = (v, u, w, f): the first three derivative blocks
            # are shifted copies of the state; only the last block calls f.
            for q in range(3 * m):
                K[i, q] = U[m + q]
            for p in range(m):
                yb[p] = U[p]
            Fi = f(x + c[i] * hk, yb)
            for p in range(m):
                K[i, 3 * m + p] = Fi[p]
        ok = True
        for q in range(m4):
            acc = 0.0
            for i in range(s):
                acc += b[i] * K[i, q]
            u[q] += hk * acc
            if not np.isfinite(u[q]):
                ok = False
        xn = x0 + (k + 1) * h
        if k == n - 1:
            xn = xe
        xs[k + 1] = xn
        for p in range(m):
            ys[k + 1, p] = u[p]
            dys[k + 1, p] = u[m + p]
            d2ys[k + 1, p] = u[2 * m + p]
            d3ys[k + 1, p] = u[3 * m + p]
        if not ok:
            return k
    return -1
