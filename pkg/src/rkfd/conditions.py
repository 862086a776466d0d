"""Algebraic order conditions (orders 1-7) for RKFD tableaus.

Each condition equates a weighted stage sum — a weight row times a vector
built from c and Â — with an exact rational target. A tableau attains order p
when every condition of order ≤ p holds within tolerance.
"""

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "ConditionDef",
    "ConditionResult",
    "OrderReport",
    "condition_catalog",
    "evaluate_conditions",
    "attained_order",
    "DEFAULT_TOLERANCE",
    "MAX_ORDER",
]

DEFAULT_TOLERANCE = 1e-12
MAX_ORDER = 7

_WEIGHTS = {"b": "b", "bp": "bp", "bpp": "bpp", "bppp": "bppp"}


@dataclass(frozen=True)
class ConditionDef:
    """One order condition: weight row · vector == rhs."""

    order: int
    id: str
    weight: str      # which weight row: b, bp, bpp, bppp
    vector: tuple    # ("c", k) | ("Ahat", "e"|"c"|"c2") | ("had", "c"|"c2", "e"|"c")
    rhs: Fraction

    def vector_values(self, tableau):
        c, a_hat = tableau.c, tableau.a_hat
        kind = self.vector[0]
        if kind == "c":
            k = self.vector[1]
            return np.ones_like(c) if k == 0 else c ** k
        if kind == "Ahat":
            return a_hat @ self._rhs_vec(self.vector[1], c)
        if kind == "had":
            _, left, av = self.vector
            return self._rhs_vec(left, c) * (a_hat @ self._rhs_vec(av, c))
        raise ValueError(f"unknown condition vector {self.vector!r}")

    @staticmethod
    def _rhs_vec(tag, c):
        if tag == "e":
            return np.ones_like(c)
        if tag == "c":
            return c
        if tag == "c2":
            return c ** 2
        raise ValueError(f"unknown vector tag {tag!r}")

    def lhs(self, tableau):
        w = getattr(tableau, _WEIGHTS[self.weight])
        return float(w @ self.vector_values(tableau))


def _cond(order, weight, vector, rhs):
    kind = vector[0]
    if kind == "c":
        k = vector[1]
        suffix = "e" if k == 0 else ("c" if k == 1 else f"c{k}")
        cid = f"{weight}.{suffix}"
    elif kind == "Ahat":
        cid = f"{weight}.Ahat.{vector[1]}"
    else:
        cid = f"{weight}.({vector[1]}.Ahat_{vector[2]})"
    return ConditionDef(order=order, id=cid, weight=weight, vector=vector,
                        rhs=Fraction(*rhs))


_CATALOG = [
    # order 1
    _cond(1, "bppp", ("c", 0), (1, 1)),
    # order 2
    _cond(2, "bppp", ("c", 1), (1, 2)),
    _cond(2, "bpp", ("c", 0), (1, 2)),
    # order 3
    _cond(3, "bppp", ("c", 2), (1, 3)),
    _cond(3, "bpp", ("c", 1), (1, 6)),
    _cond(3, "bp", ("c", 0), (1, 6)),
    # order 4
    _cond(4, "bppp", ("c", 3), (1, 4)),
    _cond(4, "bpp", ("c", 2), (1, 12)),
    _cond(4, "bp", ("c", 1), (1, 24)),
    _cond(4, "b", ("c", 0), (1, 24)),
    # order 5
    _cond(5, "bppp", ("c", 4), (1, 5)),
    _cond(5, "bppp", ("Ahat", "e"), (1, 120)),
    _cond(5, "bpp", ("c", 3), (1, 20)),
    _cond(5, "bp", ("c", 2), (1, 60)),
    _cond(5, "b", ("c", 1), (1, 120)),
    # order 6
    _cond(6, "bppp", ("c", 5), (1, 6)),
    _cond(6, "bppp", ("Ahat", "c"), (1, 720)),
    _cond(6, "bppp", ("had", "c", "e"), (1, 144)),
    _cond(6, "bpp", ("c", 4), (1, 30)),
    _cond(6, "bpp", ("Ahat", "e"), (1, 720)),
    _cond(6, "bp", ("c", 3), (1, 120)),
    _cond(6, "b", ("c", 2), (1, 360)),
    # order 7
    _cond(7, "bppp", ("c", 6), (1, 7)),
    _cond(7, "bppp", ("had", "c", "c"), (1, 840)),
    _cond(7, "bppp", ("had", "c2", "e"), (1, 168)),
    _cond(7, "bppp", ("Ahat", "c2"), (1, 2520)),
    _cond(7, "bpp", ("c", 5), (1, 42)),
    _cond(7, "bpp", ("Ahat", "c"), (1, 5040)),
    _cond(7, "bpp", ("had", "c", "e"), (1, 1008)),
    _cond(7, "bp", ("c", 4), (1, 210)),
    _cond(7, "bp", ("Ahat", "e"), (1, 5040)),
    _cond(7, "b", ("c", 3), (1, 840)),
]


def condition_catalog(max_order=MAX_ORDER):
    """All conditions of order ≤ max_order, in catalog order.

    Conditions written with a bare Â factor denote right-multiplication by
    the ones vector e (row sums); (c.Ahat_e) is the elementwise product of c
    with the Â row sums.
    """
    if not 1 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must be in 1..{MAX_ORDER}, got {max_order}")
    return [cond for cond in _CATALOG if cond.order <= max_order]


@dataclass(frozen=True)
class ConditionResult:
    order: int
    id: str
    lhs: float
    rhs: float
    residual: float
    passed: bool


@dataclass(frozen=True)
class OrderReport:
    """Per-condition residuals and the attained algebraic order."""

    tableau_name: str
    records: tuple
    tolerance: float
    max_order: int
    attained_order: int

    def failures(self):
        return [r for r in self.records if not r.passed]

    def first_failure(self):
        for r in self.records:
            if not r.passed:
                return r
        return None

    def render_table(self):
        lines = [f"{'order':>5}  {'condition':<18} {'lhs':>24} {'rhs':>24} "
                 f"{'residual':>13}  pass"]
        for r in self.records:
            lines.append(
                f"{r.order:>5}  {r.id:<18} {r.lhs:>24.17g} {r.rhs:>24.17g} "
                f"{r.residual:>13.3e}  {'yes' if r.passed else 'NO'}")
        lines.append(f"attained order: {self.attained_order} "
                     f"(tolerance {self.tolerance:g}, through order {self.max_order})")
        return "\n".join(lines)

    def write_csv(self, fh):
        writer = csv.writer(fh)
        writer.writerow(["order", "condition_id", "lhs", "rhs", "residual", "pass"])
        for r in self.records:
            writer.writerow([r.order, r.id, repr(r.lhs), repr(r.rhs),
                             repr(r.residual), "yes" if r.passed else "no"])

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def evaluate_conditions(tableau, max_order=MAX_ORDER, tolerance=DEFAULT_TOLERANCE):
    """Evaluate every catalog condition of order ≤ max_order against a tableau."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    records = []
    for cond in condition_catalog(max_order):
        lhs = cond.lhs(tableau)
        rhs = float(cond.rhs)
        residual = lhs - rhs
        records.append(ConditionResult(
            order=cond.order, id=cond.id, lhs=lhs, rhs=rhs,
            residual=residual, passed=abs(residual) <= tolerance))
    attained = 0
    for order in range(1, max_order + 1):
        if all(r.passed for r in records if r.order == order):
            attained = order
        else:
            break
    return OrderReport(tableau_name=tableau.name, records=tuple(records),
                       tolerance=tolerance, max_order=max_order,
                       attained_order=attained)


def attained_order(tableau, tolerance=DEFAULT_TOLERANCE):
    """Largest order whose conditions all hold within tolerance (through 7)."""
    return evaluate_conditions(tableau, MAX_ORDER, tolerance).attained_order
