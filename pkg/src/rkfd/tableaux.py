"""Tableau types, builtin method coefficients, file I/O, and RK conversion.

An RKFD tableau collects the coefficients (c, Â, b, b′, b″, b‴) of a direct
one-step method for y⁗ = f(x, y); an RK tableau is the classical (A, b, c)
triple used on the first-order reduction.
"""

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TableauError",
    "TableauFileError",
    "RkfdTableau",
    "RkTableau",
    "make_rkfd_tableau",
    "builtin_rkfd4_printed",
    "builtin_rkfd4_corrected",
    "builtin_rkfd5",
    "builtin_rk4",
    "convert_rk_to_rkfd",
    "load_tableau",
    "save_tableau",
]

CONSISTENCY_TOL = 1e-12

SQRT6 = math.sqrt(6.0)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


class TableauError(ValueError):
    """A tableau violates its structural invariants."""


class TableauFileError(TableauError):
    """A tableau file failed to parse or validate."""


def _rational(text):
    """Parse a 'p/q' or plain-integer string to the correctly rounded float."""
    if not _RATIONAL_RE.match(text):
        raise TableauError(f"not a rational string 'p/q': {text!r}")
    p, _, q = text.partition("/")
    num = int(p)
    if not q:
        return float(num)
    den = int(q)
    if den == 0:
        raise TableauError(f"zero denominator in {text!r}")
    # int/int division is correctly rounded for any magnitudes seen here
    return num / den


def _coerce_number(value, where):
    if isinstance(value, bool):
        raise TableauError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return _rational(value)
    raise TableauError(f"{where}: expected a number or 'p/q' string, got {value!r}")


def _vector(raw, s, name):
    vec = np.array([_coerce_number(v, f"{name}[{i}]") for i, v in enumerate(raw)],
                   dtype=float)
    if vec.shape != (s,):
        raise TableauError(f"{name} must have length {s}, got {len(vec)}")
    if not np.all(np.isfinite(vec)):
        raise TableauError(f"{name} contains non-finite entries")
    vec.flags.writeable = False
    return vec


def _matrix(raw, s, name):
    rows = list(raw)
    if len(rows) != s:
        raise TableauError(f"{name} must be {s}x{s}, got {len(rows)} rows")
    mat = np.zeros((s, s))
    for i, row in enumerate(rows):
        entries = list(row)
        if len(entries) != s:
            raise TableauError(f"{name} row {i} must have {s} entries, got {len(entries)}")
        for j, v in enumerate(entries):
            mat[i, j] = _coerce_number(v, f"{name}[{i}][{j}]")
    if not np.all(np.isfinite(mat)):
        raise TableauError(f"{name} contains non-finite entries")
    mat.flags.writeable = False
    return mat


def _is_strictly_lower(mat):
    return bool(np.all(mat[np.triu_indices_from(mat)] == 0.0))


@dataclass(frozen=True, eq=False)
class RkfdTableau:
    """Coefficients (c, Â, b, b′, b″, b‴) of one RKFD method."""

    name: str
    c: np.ndarray
    a_hat: np.ndarray
    b: np.ndarray
    bp: np.ndarray
    bpp: np.ndarray
    bppp: np.ndarray
    declared_order: int | None = None
    explicit: bool = field(init=False)

    def __post_init__(self):
        s = len(self.c)
        for nm in ("c", "b", "bp", "bpp", "bppp"):
            vec = getattr(self, nm)
            object.__setattr__(self, nm, _vector(vec, s, nm))
        object.__setattr__(self, "a_hat", _matrix(self.a_hat, s, "a_hat"))
        object.__setattr__(self, "explicit", _is_strictly_lower(self.a_hat))
        if self.declared_order is not None:
            if int(self.declared_order) != self.declared_order or self.declared_order < 1:
                raise TableauError("declared_order must be a positive integer")
            object.__setattr__(self, "declared_order", int(self.declared_order))
            total = float(np.sum(self.bppp))
            if abs(total - 1.0) > CONSISTENCY_TOL:
                raise TableauError(
                    f"first-order consistency violated: sum(bppp) = {total!r} != 1")

    @property
    def s(self):
        return len(self.c)

    def coefficients_equal(self, other):
        """Bit-exact coefficient comparison (used for round-trip checks)."""
        return (
            self.name == other.name
            and self.declared_order == other.declared_order
            and all(
                np.array_equal(getattr(self, nm), getattr(other, nm))
                for nm in ("c", "a_hat", "b", "bp", "bpp", "bppp")
            )
        )


@dataclass(frozen=True, eq=False)
class RkTableau:
    """Classical explicit Runge-Kutta coefficients (A, b, c)."""

    name: str
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        s = len(self.c)
        object.__setattr__(self, "c", _vector(self.c, s, "c"))
        object.__setattr__(self, "b", _vector(self.b, s, "b"))
        object.__setattr__(self, "A", _matrix(self.A, s, "A"))
        if not _is_strictly_lower(self.A):
            raise TableauError("only explicit RK tableaus (strictly lower A) are supported")
        rowsum = self.A @ np.ones(s)
        bad = np.abs(rowsum - self.c) > CONSISTENCY_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise TableauError(
                f"row-sum consistency violated at stage {i}: "
                f"sum(A[{i}]) = {rowsum[i]!r} but c[{i}] = {self.c[i]!r}")

    @property
    def s(self):
        return len(self.c)

    def coefficients_equal(self, other):
        return (
            self.name == other.name
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
        )


def make_rkfd_tableau(name, c, a_hat, b, bp, bpp, bppp, declared_order=None):
    """Build a validated RKFD tableau from raw coefficient containers.

    Entries may be numbers or rational strings like "209/1926".
    """
    return RkfdTableau(name=name, c=c, a_hat=a_hat, b=b, bp=bp, bpp=bpp,
                       bppp=bppp, declared_order=declared_order)


def builtin_rkfd4_printed():
    """Three-stage fourth-order-target tableau with the as-published weights.

    The third y′ weight (6/1926) carries a transcription defect: the
    third-order condition b′ᵀe = 1/6 misses by exactly 1/1926, capping the
    attained order at 2. See builtin_rkfd4_corrected for the repaired variant.
    """
    return _rkfd4(bp3=6 / 1926, name="rkfd4-printed")


def builtin_rkfd4_corrected():
    """The rkfd4 tableau with the third y′ weight repaired to 5/1926.

    With the repair, b′ᵀe = (107 + 209 + 5)/1926 = 1/6 and
    b′ᵀc = (209·4/11 + 5·17/20)/1926 = 1/24 hold exactly, giving attained
    order 4.
    """
    return _rkfd4(bp3=5 / 1926, name="rkfd4")


def _rkfd4(bp3, name):
    c = [0.0, 4 / 11, 17 / 20]
    a_hat = [
        [0.0, 0.0, 0.0],
        [-1 / 5, 0.0, 0.0],
        [19 / 125, 19 / 125, 0.0],
    ]
    b = [17 / 200, -7 / 75, 1 / 20]
    bp = [1 / 18, 209 / 1926, bp3]
    bpp = [47 / 408, 847 / 2568, 100 / 1819]
    bppp = [47 / 408, 1331 / 2568, 2000 / 5457]
    return RkfdTableau(name=name, c=c, a_hat=a_hat, b=b, bp=bp, bpp=bpp,
                       bppp=bppp, declared_order=4)


def builtin_rkfd5():
    """Three-stage fifth-order tableau with abscissae 3/5 ± √6/10.

    All coefficients are exact closed forms in √6. The stage-weight entries
    are the exact solutions of the fifth- and sixth-order stage conditions
    {b‴ᵀÂe = 1/120, b‴ᵀÂc = 1/720, b‴ᵀ(c·Âe) = 1/144}; the rational
    approximations sometimes quoted for them (≈ 0.0216145, −0.0028219,
    0.0032074 as plain fractions) are accurate to only ~3e-7 and would break
    those conditions.
    """
    c = [0.0, 3 / 5 + SQRT6 / 10, 3 / 5 - SQRT6 / 10]
    a_hat = [
        [0.0, 0.0, 0.0],
        [11 / 1000 + 13 * SQRT6 / 3000, 0.0, 0.0],
        [21 / 5000 - 43 * SQRT6 / 15000, 17 / 2500 - 11 * SQRT6 / 7500, 0.0],
    ]
    b = [19 / 1080, 13 / 1080 - 11 * SQRT6 / 2160, 13 / 1080 + 11 * SQRT6 / 2160]
    bp = [1 / 18, 1 / 18 - SQRT6 / 48, 1 / 18 + SQRT6 / 48]
    bpp = [1 / 9, 7 / 36 - SQRT6 / 18, 7 / 36 + SQRT6 / 18]
    bppp = [1 / 9, 4 / 9 - SQRT6 / 36, 4 / 9 + SQRT6 / 36]
    return RkfdTableau(name="rkfd5", c=c, a_hat=a_hat, b=b, bp=bp, bpp=bpp,
                       bppp=bppp, declared_order=5)


def builtin_rk4():
    """The classic four-stage fourth-order Runge-Kutta tableau."""
    A = [
        [0.0, 0.0, 0.0, 0.0],
        [1 / 2, 0.0, 0.0, 0.0],
        [0.0, 1 / 2, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
    return RkTableau(name="rk4", A=A, b=[1 / 6, 1 / 3, 1 / 3, 1 / 6],
                     c=[0.0, 1 / 2, 1 / 2, 1.0])


def convert_rk_to_rkfd(rk, name=None):
    """Map an explicit RK tableau to the RKFD tableau it induces.

    Applying the RK method to the first-order reduction of y⁗ = f(x, y) and
    collecting terms gives b‴ = b, b″ᵀ = bᵀA, b′ᵀ = bᵀA², bᵀ_rkfd = bᵀA³ and
    Â = A⁴, with c unchanged. For x-only f the converted method reproduces
    the RK-on-reduction run exactly.
    """
    if not isinstance(rk, RkTableau):
        raise TableauError("convert_rk_to_rkfd expects an RkTableau")
    A, b = rk.A, rk.b
    A2 = A @ A
    A3 = A2 @ A
    return RkfdTableau(
        name=name or f"{rk.name}-rkfd",
        c=rk.c,
        a_hat=A2 @ A2,
        b=b @ A3,
        bp=b @ A2,
        bpp=b @ A,
        bppp=b,
        declared_order=None,
    )


_RKFD_KEYS = {"name", "kind", "c", "b", "a_hat", "bp", "bpp", "bppp", "declared_order"}
_RK_KEYS = {"name", "kind", "c", "b", "A"}


def load_tableau(path):
    """Load an RKFD or RK tableau from a JSON file.

    Numeric entries may be JSON numbers or rational strings "p/q"; unknown
    fields are rejected. Returns RkfdTableau or RkTableau depending on the
    file's "kind".
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise TableauFileError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise TableauFileError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise TableauFileError(f"{path}: top-level value must be an object")

    kind = raw.get("kind")
    if kind == "rkfd":
        allowed, required = _RKFD_KEYS, _RKFD_KEYS - {"declared_order"}
    elif kind == "rk":
        allowed, required = _RK_KEYS, _RK_KEYS
    else:
        raise TableauFileError(f"{path}: field 'kind' must be \"rkfd\" or \"rk\", got {kind!r}")

    unknown = set(raw) - allowed
    if unknown:
        raise TableauFileError(f"{path}: unknown fields {sorted(unknown)}")
    missing = required - set(raw)
    if missing:
        raise TableauFileError(f"{path}: missing fields {sorted(missing)}")
    if not isinstance(raw["name"], str):
        raise TableauFileError(f"{path}: field 'name' must be a string")

    try:
        if kind == "rkfd":
            return RkfdTableau(
                name=raw["name"], c=raw["c"], a_hat=raw["a_hat"], b=raw["b"],
                bp=raw["bp"], bpp=raw["bpp"], bppp=raw["bppp"],
                declared_order=raw.get("declared_order"),
            )
        return RkTableau(name=raw["name"], A=raw["A"], b=raw["b"], c=raw["c"])
    except TableauError as exc:
        raise TableauFileError(f"{path}: {exc}") from exc


def save_tableau(tableau, path):
    """Write a tableau as JSON; floats round-trip bit-exactly."""
    if isinstance(tableau, RkfdTableau):
        doc = {
            "name": tableau.name,
            "kind": "rkfd",
            "c": tableau.c.tolist(),
            "a_hat": tableau.a_hat.tolist(),
            "b": tableau.b.tolist(),
            "bp": tableau.bp.tolist(),
            "bpp": tableau.bpp.tolist(),
            "bppp": tableau.bppp.tolist(),
        }
        if tableau.declared_order is not None:
            doc["declared_order"] = tableau.declared_order
    elif isinstance(tableau, RkTableau):
        doc = {
            "name": tableau.name,
            "kind": "rk",
            "c": tableau.c.tolist(),
            "A": tableau.A.tolist(),
            "b": tableau.b.tolist(),
        }
    else:
        raise TableauError(f"cannot save object of type {type(tableau).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
