"""Exact-arithmetic helpers shared by the test suite.

`Surd` implements the field Q(√6) so tableau identities can be checked
exactly, with float conversion only at the final comparison. `fd_weights`
solves the finite-difference moment system over Fractions, giving exact
stencil weights for the derivative oracles.
"""

import math
from fractions import Fraction

F = Fraction


class Surd:
    """Exact element a + b·√6 with rational a, b."""

    __slots__ = ("a", "b")
    N = 6

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def of(cls, value):
        return value if isinstance(value, Surd) else cls(value, 0)

    def __add__(self, other):
        other = Surd.of(other)
        return Surd(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-Surd.of(other))

    def __rsub__(self, other):
        return Surd.of(other) + (-self)

    def __mul__(self, other):
        other = Surd.of(other)
        return Surd(self.a * other.a + self.N * self.b * other.b,
                    self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def inverse(self):
        den = self.a * self.a - self.N * self.b * self.b
        if den == 0:
            raise ZeroDivisionError("zero element of Q(sqrt 6)")
        return Surd(self.a / den, -self.b / den)

    def __truediv__(self, other):
        return self * Surd.of(other).inverse()

    def __rtruediv__(self, other):
        return Surd.of(other) * self.inverse()

    def __pow__(self, k):
        out = Surd(1)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        other = Surd.of(other)
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(6.0)

    def __repr__(self):
        return f"Surd({self.a}, {self.b})"


SQRT6 = Surd(0, 1)


def s_dot(u, v):
    acc = Surd(0)
    for x, y in zip(u, v):
        acc = acc + Surd.of(x) * Surd.of(y)
    return acc


def s_powers(c, k):
    return [Surd.of(x) ** k for x in c]


def s_hadamard(u, v):
    return [Surd.of(x) * Surd.of(y) for x, y in zip(u, v)]


def s_matvec(M, v):
    return [s_dot(row, v) for row in M]


def exact_rkfd5():
    """Exact coefficients of the three-stage fifth-order tableau in Q(√6)."""
    c = [Surd(0), Surd(F(3, 5)) + SQRT6 / 10, Surd(F(3, 5)) - SQRT6 / 10]
    a_hat = [
        [Surd(0), Surd(0), Surd(0)],
        [Surd(F(11, 1000)) + SQRT6 * F(13, 3000), Surd(0), Surd(0)],
        [Surd(F(21, 5000)) - SQRT6 * F(43, 15000),
         Surd(F(17, 2500)) - SQRT6 * F(11, 7500), Surd(0)],
    ]
    b = [Surd(F(19, 1080)), Surd(F(13, 1080)) - SQRT6 * F(11, 2160),
         Surd(F(13, 1080)) + SQRT6 * F(11, 2160)]
    bp = [Surd(F(1, 18)), Surd(F(1, 18)) - SQRT6 / 48, Surd(F(1, 18)) + SQRT6 / 48]
    bpp = [Surd(F(1, 9)), Surd(F(7, 36)) - SQRT6 / 18, Surd(F(7, 36)) + SQRT6 / 18]
    bppp = [Surd(F(1, 9)), Surd(F(4, 9)) - SQRT6 / 36, Surd(F(4, 9)) + SQRT6 / 36]
    return {"c": c, "a_hat": a_hat, "b": b, "bp": bp, "bpp": bpp, "bppp": bppp}


def exact_rkfd4(corrected=True):
    """Exact rational coefficients of the three-stage fourth-order tableau."""
    return {
        "c": [F(0), F(4, 11), F(17, 20)],
        "a_hat": [[F(0), F(0), F(0)],
                  [F(-1, 5), F(0), F(0)],
                  [F(19, 125), F(19, 125), F(0)]],
        "b": [F(17, 200), F(-7, 75), F(1, 20)],
        "bp": [F(1, 18), F(209, 1926), F(5 if corrected else 6, 1926)],
        "bpp": [F(47, 408), F(847, 2568), F(100, 1819)],
        "bppp": [F(47, 408), F(1331, 2568), F(2000, 5457)],
    }


def frac_dot(u, v):
    return sum((F(x) * F(y) for x, y in zip(u, v)), F(0))


def frac_matvec(M, v):
    return [frac_dot(row, v) for row in M]


def frac_matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), F(0)) for j in range(n)]
            for i in range(n)]


def _solve_fractions(M, rhs):
    n = len(rhs)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = F(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def fd_weights(offsets, deriv):
    """Exact finite-difference weights for the given integer offsets.

    Solves the moment system Σ w_i o_i^r = r!·[r = deriv] for r < len(offsets),
    so Σ w_i g(x + o_i k) / k^deriv approximates g^(deriv)(x) with truncation
    order len(offsets) − deriv (one better on symmetric stencils).
    """
    n = len(offsets)
    if deriv >= n:
        raise ValueError("need more points than the derivative order")
    M = [[F(o) ** r for o in offsets] for r in range(n)]
    rhs = [F(0)] * n
    rhs[deriv] = F(math.factorial(deriv))
    return _solve_fractions(M, rhs)


def fd_derivative(g, x, deriv, k, width=7):
    """Numerical derivative of g at x from a centered `width`-point stencil."""
    half = width // 2
    offsets = list(range(-half, half + 1))
    weights = fd_weights(offsets, deriv)
    acc = 0.0
    for w, o in zip(weights, offsets):
        acc = acc + float(w) * g(x + o * k)
    return acc / k ** deriv
