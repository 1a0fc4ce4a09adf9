"""
Geometry kernel: rational points, simplexes, direction frames and C_{x,u,λ} simplexes.

All values are immutable and all arithmetic is exact (fractions.Fraction). Numeric (float)
frames exist only for the tangent-estimation path.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import isclose, prod, sqrt
from typing import Iterable, List, Sequence, Tuple

from ..core.exceptions import (
    DegenerateSimplex,
    DimensionMismatch,
    FrameError,
    PointOutsideSimplex,
    PreconditionError,
)
from ..core.logger import get_logger
from . import linalg
from .linalg import Vector, add, dot, scale, sub, to_fraction

log = get_logger("geometry")

Point = Tuple[Fraction, ...]

NUMERIC_FRAME_TOL = 1e-9


def point(values: Iterable) -> Point:
    p = tuple(to_fraction(v, name="coordinate") for v in values)
    if not p:
        raise DimensionMismatch("points need at least one coordinate")
    return p


def den(v: Sequence[Fraction]) -> int:
    """Least common denominator of the coordinates of a rational point."""
    return linalg.lcm_denominator(v)


def in_unit_cube(p: Sequence[Fraction]) -> bool:
    return all(0 <= c <= 1 for c in p)


def homogeneous(v: Sequence[Fraction]) -> Tuple[int, ...]:
    """The primitive integer vector den(v)·(v, 1)."""
    d = den(v)
    return tuple(int(c * d) for c in v) + (d,)


@dataclass(frozen=True)
class Simplex:
    """conv(v_0, …, v_m) with affinely independent rational vertices in canonical (lexicographic) order."""

    vertices: Tuple[Point, ...]

    def __post_init__(self) -> None:
        verts = tuple(sorted(tuple(Fraction(c) for c in v) for v in self.vertices))
        if not verts:
            raise DegenerateSimplex("a simplex needs at least one vertex")
        n = len(verts[0])
        if n == 0 or any(len(v) != n for v in verts):
            raise DimensionMismatch("simplex vertices have mixed dimensions")
        if len(set(verts)) != len(verts):
            raise DegenerateSimplex(f"repeated vertex in {verts}")
        if linalg.rank([v + (Fraction(1),) for v in verts]) != len(verts):
            raise DegenerateSimplex(f"vertices are affinely dependent: {verts}")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def of(cls, points: Iterable[Sequence]) -> "Simplex":
        return cls(tuple(point(p) for p in points))

    @classmethod
    def trusted(cls, points: Iterable[Point]) -> "Simplex":
        """Build without re-validation; only for vertex sets already known to be independent."""
        s = object.__new__(cls)
        object.__setattr__(s, "vertices", tuple(sorted(points)))
        return s

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def ambient(self) -> int:
        return len(self.vertices[0])

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        inner = ", ".join("(" + ",".join(linalg.fraction_str(c) for c in v) + ")" for v in self.vertices)
        return f"conv({inner})"

    @cached_property
    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)

    @cached_property
    def homogeneous_rows(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(homogeneous(v) for v in self.vertices)

    @cached_property
    def bbox(self) -> Tuple[Tuple[Fraction, Fraction], ...]:
        return tuple((min(col), max(col)) for col in zip(*self.vertices))

    @cached_property
    def barycenter(self) -> Point:
        k = len(self.vertices)
        return tuple(sum(col, Fraction(0)) / k for col in zip(*self.vertices))

    def face(self, verts: Iterable[Point]) -> "Simplex":
        verts = tuple(verts)
        if not set(verts) <= self.vertex_set:
            raise PreconditionError("not a vertex subset of the simplex")
        return Simplex.trusted(verts)

    def faces(self) -> List["Simplex"]:
        """All nonempty faces, smallest first."""
        out = []
        for r in range(1, len(self.vertices) + 1):
            out.extend(Simplex.trusted(c) for c in combinations(self.vertices, r))
        return out

    def is_face_of(self, other: "Simplex") -> bool:
        return self.vertex_set <= other.vertex_set

    @cached_property
    def functionals(self) -> Tuple[Tuple["AffineFunctional", ...], Tuple["AffineFunctional", ...]]:
        return _functionals(self)

    @cached_property
    def _affine_solver(self):
        # rows of the homogeneous system Σ t_i (v_i, 1) = (p, 1); keep a row basis and its inverse
        n = self.ambient
        h = [[v[r] for v in self.vertices] for r in range(n)] + [[Fraction(1)] * len(self.vertices)]
        _, pivots = linalg._row_reduce([list(col) for col in zip(*h)], len(h))
        basis = pivots[: len(self.vertices)]
        inv = linalg.invert([h[r] for r in basis])
        rest = [r for r in range(n + 1) if r not in basis]
        return h, basis, inv, rest


def check_dims(*items: Sequence) -> int:
    n = len(items[0])
    for it in items[1:]:
        if len(it) != n:
            raise DimensionMismatch(f"dimension {len(it)} != {n}")
    return n


def affine_coordinates(s: Simplex, p: Sequence[Fraction]) -> Vector | None:
    """Coordinates t with Σ t_i = 1 and Σ t_i v_i = p, or None when p ∉ aff S."""
    if len(p) != s.ambient:
        raise DimensionMismatch(f"point of dimension {len(p)} vs simplex in R^{s.ambient}")
    h, basis, inv, rest = s._affine_solver
    rhs = tuple(p) + (Fraction(1),)
    t = linalg.mat_vec(inv, [rhs[r] for r in basis])
    for r in rest:
        if linalg.dot(h[r], t) != rhs[r]:
            return None
    return t


def barycentric(s: Simplex, p: Sequence[Fraction]) -> Vector | None:
    """Barycentric coordinates of p in S, or None when p ∉ S."""
    if len(p) != s.ambient:
        raise DimensionMismatch(f"point of dimension {len(p)} vs simplex in R^{s.ambient}")
    for c, (lo, hi) in zip(p, s.bbox):
        if c < lo or c > hi:
            return None
    t = affine_coordinates(s, p)
    if t is None or any(x < 0 for x in t):
        return None
    return t


def contains(s: Simplex, p: Sequence[Fraction]) -> bool:
    return barycentric(s, p) is not None


def simplex_in_simplex(inner: Simplex, outer: Simplex) -> bool:
    return all(contains(outer, v) for v in inner.vertices)


def smallest_containing_face(s: Simplex, p: Sequence[Fraction]) -> Simplex:
    t = barycentric(s, p)
    if t is None:
        raise PointOutsideSimplex(f"{tuple(map(linalg.fraction_str, p))} is not in {s}")
    return Simplex.trusted(v for v, w in zip(s.vertices, t) if w > 0)


def smallest_face_containing_all(s: Simplex, points: Iterable[Sequence[Fraction]]) -> Simplex:
    support = set()
    for p in points:
        support |= smallest_containing_face(s, p).vertex_set
    return Simplex.trusted(support)


def relint_contains(s: Simplex, p: Sequence[Fraction]) -> bool:
    t = barycentric(s, p)
    return t is not None and all(x > 0 for x in t)


def elementary_divisors(s: Simplex) -> Tuple[int, ...]:
    """Smith invariants of the matrix of rows den(v_i)·(v_i, 1)."""
    return linalg.smith(s.homogeneous_rows)[0]


def multiplicity(s: Simplex) -> int:
    return prod(elementary_divisors(s))


def is_regular(s: Simplex) -> bool:
    return all(d == 1 for d in elementary_divisors(s))


# ---------- Affine functionals ----------

@dataclass(frozen=True)
class Hyperplane:
    """{p : normal·p = offset}, scaled so that the first nonzero normal coordinate is 1."""

    normal: Tuple[Fraction, ...]
    offset: Fraction

    @classmethod
    def of(cls, normal: Sequence[Fraction], offset: Fraction) -> "Hyperplane | None":
        lead = next((c for c in normal if c != 0), None)
        if lead is None:
            return None
        return cls(tuple(Fraction(c) / lead for c in normal), Fraction(offset) / lead)

    def value(self, p: Sequence[Fraction]) -> Fraction:
        return dot(self.normal, p) - self.offset


@dataclass(frozen=True)
class AffineFunctional:
    """p ↦ normal·p + const."""

    normal: Tuple[Fraction, ...]
    const: Fraction

    def __call__(self, p: Sequence[Fraction]) -> Fraction:
        return dot(self.normal, p) + self.const

    def negated(self) -> "AffineFunctional":
        return AffineFunctional(tuple(-c for c in self.normal), -self.const)

    def hyperplane(self) -> Hyperplane | None:
        return Hyperplane.of(self.normal, -self.const)


def simplex_functionals(s: Simplex) -> Tuple[Tuple[AffineFunctional, ...], Tuple[AffineFunctional, ...]]:
    """
    (inequalities, equations) with S = {β ≥ 0 for the inequalities, β = 0 for the equations}.

    S is completed to a full-dimensional simplex by adding points v_0 + e_i; the barycentric
    functionals of the completion do the rest.
    """
    return s.functionals


def _functionals(s: Simplex) -> Tuple[Tuple[AffineFunctional, ...], Tuple[AffineFunctional, ...]]:
    n = s.ambient
    pts = list(s.vertices)
    base = s.vertices[0]
    for i in range(n):
        if len(pts) == n + 1:
            break
        cand = tuple(c + (1 if j == i else 0) for j, c in enumerate(base))
        if linalg.rank([q + (Fraction(1),) for q in pts + [cand]]) == len(pts) + 1:
            pts.append(cand)
    h = [[q[r] for q in pts] for r in range(n)] + [[Fraction(1)] * (n + 1)]
    inv = linalg.invert(h)
    betas = [AffineFunctional(tuple(row[:n]), row[n]) for row in inv]
    return tuple(betas[: len(s.vertices)]), tuple(betas[len(s.vertices):])


def simplex_hyperplanes(s: Simplex) -> List[Hyperplane]:
    ineq, eq = simplex_functionals(s)
    out = []
    for b in ineq + eq:
        hp = b.hyperplane()
        if hp is not None and hp not in out:
            out.append(hp)
    return out


# ---------- Direction frames ----------

@dataclass(frozen=True)
class DirectionFrame:
    """
    Ordered pairwise orthogonal directions u_1, …, u_k in R^n.

    Exact frames hold rational vectors of arbitrary (positive) length; numeric frames hold
    float unit vectors, orthonormal within `tol`.
    """

    dim: int
    vectors: Tuple[Tuple, ...]
    mode: str = "exact"
    tol: float = NUMERIC_FRAME_TOL

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "numeric"):
            raise FrameError(f"unknown frame mode {self.mode!r}")
        if len(self.vectors) > self.dim:
            raise FrameError(f"{len(self.vectors)} directions in R^{self.dim}")
        if self.mode == "exact":
            vs = tuple(tuple(Fraction(c) for c in v) for v in self.vectors)
        else:
            vs = tuple(tuple(float(c) for c in v) for v in self.vectors)
        for v in vs:
            if len(v) != self.dim:
                raise DimensionMismatch(f"direction of dimension {len(v)} in R^{self.dim}")
            if all(c == 0 for c in v):
                raise FrameError("zero vector in frame")
        for a, b in combinations(vs, 2):
            d = sum(x * y for x, y in zip(a, b))
            if self.mode == "exact" and d != 0:
                raise FrameError("frame vectors are not orthogonal")
            if self.mode == "numeric" and abs(d) > self.tol:
                raise FrameError(f"frame vectors are not orthogonal within {self.tol}")
        if self.mode == "numeric":
            for v in vs:
                if not isclose(sqrt(sum(x * x for x in v)), 1.0, abs_tol=self.tol):
                    raise FrameError("numeric frame vectors must have unit norm")
        object.__setattr__(self, "vectors", vs)

    @classmethod
    def exact(cls, vectors: Iterable[Sequence]) -> "DirectionFrame":
        vs = tuple(tuple(to_fraction(c, name="frame coordinate") for c in v) for v in vectors)
        if not vs:
            raise FrameError("empty frame")
        return cls(len(vs[0]), vs, "exact")

    @property
    def k(self) -> int:
        return len(self.vectors)

    def prefix(self, l: int) -> "DirectionFrame":
        return DirectionFrame(self.dim, self.vectors[:l], self.mode, self.tol)

    def unit_vectors(self) -> List[Tuple[float, ...]]:
        out = []
        for v in self.vectors:
            nrm = sqrt(sum(float(x) ** 2 for x in v))
            out.append(tuple(float(x) / nrm for x in v))
        return out

    def as_numeric(self) -> "DirectionFrame":
        return DirectionFrame(self.dim, tuple(self.unit_vectors()), "numeric", self.tol)


@dataclass(frozen=True)
class CSimplexSpec:
    """Data (x, u, λ) of C_{x,u,λ} = conv(x, x+λ_1u_1, …, x+λ_1u_1+⋯+λ_ku_k)."""

    apex: Point
    frame: DirectionFrame
    lengths: Tuple[Fraction, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.frame.mode != "exact":
            raise FrameError("C-simplexes need an exact frame")
        lengths = tuple(to_fraction(l, name="lambda") for l in self.lengths)
        if len(lengths) != self.frame.k:
            raise DimensionMismatch(f"{len(lengths)} lengths for a frame of {self.frame.k} directions")
        if any(l <= 0 for l in lengths):
            raise PreconditionError("all lengths must be positive")
        check_dims(self.apex, self.frame.vectors[0] if self.frame.vectors else self.apex)
        object.__setattr__(self, "apex", tuple(Fraction(c) for c in self.apex))
        object.__setattr__(self, "lengths", lengths)

    @property
    def k(self) -> int:
        return self.frame.k

    def prefix(self, l: int) -> "CSimplexSpec":
        return CSimplexSpec(self.apex, self.frame.prefix(l), self.lengths[:l])

    def vertex_points(self) -> List[Point]:
        pts = [self.apex]
        cur = self.apex
        for lam, u in zip(self.lengths, self.frame.vectors):
            cur = add(cur, scale(lam, u))
            pts.append(cur)
        return pts


def build_c_simplex(spec: CSimplexSpec) -> Simplex:
    pts = spec.vertex_points()
    try:
        return Simplex(tuple(pts))
    except DegenerateSimplex as e:
        raise DegenerateSimplex(f"degenerate frame: {e}") from e


def c_simplex_contains(spec: CSimplexSpec, p: Sequence[Fraction]) -> bool:
    """Membership via 1 ≥ s_1/λ_1 ≥ ⋯ ≥ s_k/λ_k ≥ 0 where p − x = Σ s_j u_j."""
    check_dims(spec.apex, p)
    d = sub(p, spec.apex)
    ratios = []
    rebuilt = tuple(Fraction(0) for _ in d)
    for lam, u in zip(spec.lengths, spec.frame.vectors):
        s = dot(d, u) / dot(u, u)
        rebuilt = add(rebuilt, scale(s, u))
        ratios.append(s / lam)
    if rebuilt != d:
        return False
    chain = [Fraction(1)] + ratios + [Fraction(0)]
    return all(a >= b for a, b in zip(chain, chain[1:]))


def intersect_c_simplexes(a: CSimplexSpec, b: CSimplexSpec) -> CSimplexSpec:
    """A C-simplex with the same apex and frame inside C_a ∩ C_b."""
    if a.apex != b.apex or a.frame.vectors != b.frame.vectors:
        raise PreconditionError("C-simplexes with mismatched apex/frame")
    la, lb = a.lengths, b.lengths
    eps = [min(la[0], lb[0])]
    for j in range(1, a.k):
        eps.append(min(
            min(la[j], lb[j]),
            eps[j - 1] * la[j] / la[j - 1],
            eps[j - 1] * lb[j] / lb[j - 1],
        ))
    out = CSimplexSpec(a.apex, a.frame, tuple(eps))
    built = build_c_simplex(out)
    sa, sb = build_c_simplex(a), build_c_simplex(b)
    for v in built.vertices:
        if not (contains(sa, v) and contains(sb, v)):
            raise PreconditionError(f"intersection vertex {v} escapes an input C-simplex")
    return out
