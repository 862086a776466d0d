"""Benchmark initial value problems y⁗ = f(x, y) with exact solutions.

Five standard benchmark problems plus synthetic quadrature/polynomial
problems used by property tests. Right-hand sides are written in a restricted
style (scalar math on preallocated output arrays) so the accelerated backend
can compile them; they run unchanged under the pure-numpy backend.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Ivp4",
    "problem_1",
    "problem_2",
    "problem_3",
    "problem_4",
    "problem_5",
    "quadrature_problem",
    "poly_problem",
    "benchmark_problems",
    "problem_names",
    "get_problem",
]

_EXACT_IC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Ivp4:
    """A special fourth-order IVP: y⁗ = f(x, y) with full initial data.

    `exact`, when present, maps a scalar x to the length-m solution vector.
    `depends_on_y` is False for pure quadrature problems y⁗ = g(x), which
    unlocks the RK-reduction equivalence check.
    """

    name: str
    f: callable
    x0: float
    x_end: float
    y0: np.ndarray
    dy0: np.ndarray
    d2y0: np.ndarray
    d3y0: np.ndarray
    exact: callable = None
    depends_on_y: bool = True
    m: int = field(init=False)

    def __post_init__(self):
        vecs = {}
        for nm in ("y0", "dy0", "d2y0", "d3y0"):
            v = np.atleast_1d(np.asarray(getattr(self, nm), dtype=float)).copy()
            v.flags.writeable = False
            vecs[nm] = v
            object.__setattr__(self, nm, v)
        m = len(vecs["y0"])
        if any(len(v) != m for v in vecs.values()):
            raise ValueError(f"{self.name}: initial data lengths disagree")
        object.__setattr__(self, "m", m)
        if not self.x_end > self.x0:
            raise ValueError(f"{self.name}: interval [{self.x0}, {self.x_end}] is degenerate")
        f0 = np.asarray(self.f(self.x0, vecs["y0"]), dtype=float)
        if f0.shape != (m,) or not np.all(np.isfinite(f0)):
            raise ValueError(f"{self.name}: f is not finite length-{m} on the initial data")
        if self.exact is not None:
            e0 = np.asarray(self.exact(self.x0), dtype=float)
            if e0.shape != (m,):
                raise ValueError(f"{self.name}: exact(x0) has wrong shape")
            if np.max(np.abs(e0 - vecs["y0"])) > _EXACT_IC_TOL:
                raise ValueError(f"{self.name}: exact(x0) does not match y0")

    @property
    def has_exact(self):
        return self.exact is not None

    @property
    def interval(self):
        return (self.x0, self.x_end)


def _f1(x, y):
    out = np.empty_like(y)
    out[0] = -4.0 * y[0]
    return out


def _exact1(x):
    return np.array([math.exp(x) * math.sin(x)])


def problem_1():
    """y⁗ = −4y on [0, 10]; solution eˣ·sin x (grows to e¹⁰-scale)."""
    return Ivp4(name="p1", f=_f1, x0=0.0, x_end=10.0,
                y0=[0.0], dy0=[1.0], d2y0=[2.0], d3y0=[2.0], exact=_exact1)


def _f2(x, y):
    out = np.empty_like(y)
    c = math.cos(x)
    out[0] = y[0] * y[0] + c * c + math.sin(x) - 1.0
    return out


def _exact2(x):
    return np.array([math.sin(x)])


def problem_2():
    """y⁗ = y² + cos²x + sin x − 1 on [0, 10]; solution sin x."""
    return Ivp4(name="p2", f=_f2, x0=0.0, x_end=10.0,
                y0=[0.0], dy0=[1.0], d2y0=[0.0], d3y0=[-1.0], exact=_exact2)


_HALF_PI = math.pi / 2


def _f3(x, y):
    if abs(y[0]) >= _HALF_PI:
        raise ValueError("rhs pole: |y| >= pi/2")
    out = np.empty_like(y)
    s = math.sin(y[0])
    c = math.cos(y[0])
    out[0] = 3.0 * s * (3.0 + 2.0 * s * s) / c ** 7
    return out


def _exact3(x):
    return np.array([math.asin(x)])


def problem_3():
    """y⁗ = 3 sin y (3 + 2 sin²y)/cos⁷y on [0, π/4]; solution arcsin x."""
    return Ivp4(name="p3", f=_f3, x0=0.0, x_end=math.pi / 4,
                y0=[0.0], dy0=[1.0], d2y0=[0.0], d3y0=[1.0], exact=_exact3)


def _f4(x, y):
    out = np.empty_like(y)
    out[0] = math.exp(3.0 * x) * y[3]
    out[1] = 16.0 * math.exp(-x) * y[0]
    out[2] = 81.0 * math.exp(-x) * y[1]
    out[3] = 256.0 * math.exp(-x) * y[2]
    return out


def _exact4(x):
    return np.array([math.exp(-x), math.exp(-2.0 * x),
                     math.exp(-3.0 * x), math.exp(-4.0 * x)])


def problem_4():
    """Coupled 4-component system on [0, 2]; solutions e^{−x}..e^{−4x}."""
    return Ivp4(
        name="p4", f=_f4, x0=0.0, x_end=2.0,
        y0=[1.0, 1.0, 1.0, 1.0],
        dy0=[-1.0, -2.0, -3.0, -4.0],
        d2y0=[1.0, 4.0, 9.0, 16.0],
        d3y0=[-1.0, -8.0, -27.0, -64.0],
        exact=_exact4)


_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _f5(x, y):
    out = np.empty_like(y)
    out[0] = 1.0 - y[0]
    return out


def _exact5(x):
    return np.array([1.0 - math.cosh(x * _INV_SQRT2) * math.cos(x * _INV_SQRT2)])


def problem_5():
    """Beam-on-elastic-foundation model y⁗ = −y + 1 on [0, 1], zero initial data.

    Solution 1 − cosh(x/√2)·cos(x/√2).
    """
    return Ivp4(name="p5", f=_f5, x0=0.0, x_end=1.0,
                y0=[0.0], dy0=[0.0], d2y0=[0.0], d3y0=[0.0], exact=_exact5)


def quadrature_problem(g, exact=None, x_end=1.0, name="quadrature"):
    """y⁗ = g(x) with zero initial data on [0, x_end].

    The rhs ignores y entirely, so the problem is flagged depends_on_y=False.
    """
    def f(x, y):
        out = np.empty_like(y)
        out[0] = g(x)
        return out

    return Ivp4(name=name, f=f, x0=0.0, x_end=float(x_end),
                y0=[0.0], dy0=[0.0], d2y0=[0.0], d3y0=[0.0],
                exact=exact, depends_on_y=False)


_POLY_SCALE = {k: math.factorial(k) / math.factorial(k + 4) for k in range(4)}


def poly_problem(k):
    """y⁗ = xᵏ (k ≤ 3) with zero initial data; exact y = x^{k+4}·k!/(k+4)!."""
    if k not in (0, 1, 2, 3):
        raise ValueError(f"poly_problem degree must be 0..3, got {k}")
    scale = _POLY_SCALE[k]

    def f(x, y):
        out = np.empty_like(y)
        out[0] = x ** k
        return out

    def exact(x):
        return np.array([scale * x ** (k + 4)])

    return Ivp4(name=f"poly{k}", f=f, x0=0.0, x_end=1.0,
                y0=[0.0], dy0=[0.0], d2y0=[0.0], d3y0=[0.0],
                exact=exact, depends_on_y=False)


_FACTORIES = {
    "p1": problem_1,
    "p2": problem_2,
    "p3": problem_3,
    "p4": problem_4,
    "p5": problem_5,
    "poly0": lambda: poly_problem(0),
    "poly1": lambda: poly_problem(1),
    "poly2": lambda: poly_problem(2),
    "poly3": lambda: poly_problem(3),
}

_BENCHMARK_NAMES = ("p1", "p2", "p3", "p4", "p5")


def problem_names():
    """All selectable problem names."""
    return list(_FACTORIES)


def benchmark_problems():
    """The five benchmark problems (what the 'all' selector expands to)."""
    return [_FACTORIES[n]() for n in _BENCHMARK_NAMES]


def get_problem(name):
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; known: {', '.join(_FACTORIES)}") from None
    return factory()
