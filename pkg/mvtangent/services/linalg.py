"""
Exact linear algebra over the rationals, plus Smith normal forms of integer matrices.

Everything here works on plain lists/tuples of fractions.Fraction; integer lattice
questions are delegated to sympy's normal forms.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import List, Sequence, Tuple

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from ..core.exceptions import SchemaError

Vector = Tuple[Fraction, ...]


def to_fraction(value, *, allow_float: bool = False, name: str = "value") -> Fraction:
    """Convert int / Fraction / "p/q" string to Fraction. Floats only when allowed (exactly)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise SchemaError(f"{name} must be rational, got bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(f"{name} is not a rational string: {value!r}") from e
    if isinstance(value, float):
        if not allow_float:
            raise SchemaError(f"{name} must be an exact rational (\"p/q\"), got float {value!r}")
        return Fraction(value)
    raise SchemaError(f"{name} must be int/Fraction/str, got {type(value).__name__}")


def fraction_str(q: Fraction) -> str:
    """Canonical rational string: "p" for integers, "p/q" otherwise."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def add(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def scale(c: Fraction, a: Sequence[Fraction]) -> Vector:
    return tuple(c * x for x in a)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def lcm_denominator(values: Sequence[Fraction]) -> int:
    return lcm(1, *(Fraction(v).denominator for v in values))


def _row_reduce(rows: List[List[Fraction]], ncols: int) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form (in place on a copy); returns (matrix, pivot columns)."""
    m = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    _, pivots = _row_reduce([list(map(Fraction, r)) for r in rows], len(rows[0]))
    return len(pivots)


def invert(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    n = len(rows)
    aug = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    m, pivots = _row_reduce(aug, n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ValueError("matrix is singular")
    return [row[n:] for row in m]


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        out *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * out


def mat_vec(rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(dot(r, v) for r in rows)


@lru_cache(maxsize=65536)
def smith(rows: Tuple[Tuple[int, ...], ...]) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...], Tuple[Tuple[int, ...], ...]]:
    """
    Smith decomposition D = P·W·Q of an integer matrix W (given as a tuple of rows).

    Returns (diagonal, P, Q) with the diagonal made nonnegative. Cached: the same homogeneous
    vertex matrices come back over and over during regularization.
    """
    w = Matrix([list(r) for r in rows])
    d, p, q = smith_normal_decomp(w, domain=ZZ)
    k = min(w.shape)
    diag = []
    p_rows = [[int(x) for x in p.row(i)] for i in range(p.rows)]
    for i in range(k):
        e = int(d[i, i])
        if e < 0:
            # flip the sign of the matching row of P so D stays nonnegative
            p_rows[i] = [-x for x in p_rows[i]]
            e = -e
        diag.append(e)
    q_rows = tuple(tuple(int(x) for x in q.row(i)) for i in range(q.rows))
    return tuple(diag), tuple(tuple(r) for r in p_rows), q_rows
