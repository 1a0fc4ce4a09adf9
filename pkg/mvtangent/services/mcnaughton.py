"""
Z-maps and McNaughton functions.

A Z-map is stored in vertex form: a regular carrier triangulation plus one rational value per
vertex. The integer affine piece of every cell is derived (and checked) at construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

from ..core.config import settings
from ..core.exceptions import (
    DimensionMismatch,
    DivisibilityError,
    NonIntegerPiece,
    NonRegularCarrier,
    OutsideDomain,
    PreconditionError,
)
from ..core.logger import get_logger
from . import linalg
from .closed_sets import ClosedSet, exact
from .complexes import ComplexBuilder, SimplicialComplex, box_contains, boxes_overlap, restrict_to
from .geometry import AffineFunctional, Point, Simplex, barycentric, den, is_regular, simplex_functionals
from .polyhedra import (
    Polyhedron,
    intersect_polyhedra,
    polyhedra_equal,
    simplex_in_polyhedron,
)
from .triangulation import _regularize_builder, common_refinement, same_support

log = get_logger("mcnaughton")

MV_OPS = {"oplus": "oplus", "⊕": "oplus", "neg": "neg", "¬": "neg", "wedge": "wedge", "∧": "wedge",
          "vee": "vee", "∨": "vee", "odot": "odot", "⊙": "odot"}


@dataclass(frozen=True)
class AffinePiece:
    """p ↦ A·p + b with integer A (codomain × n) and integer b."""

    matrix: Tuple[Tuple[int, ...], ...]
    offset: Tuple[int, ...]

    def __call__(self, p: Sequence[Fraction]) -> Point:
        return tuple(linalg.dot(row, p) + c for row, c in zip(self.matrix, self.offset))

    def apply_float(self, p: Sequence[float]) -> Tuple[float, ...]:
        return tuple(sum(a * float(x) for a, x in zip(row, p)) + c for row, c in zip(self.matrix, self.offset))

    def compose(self, beta: AffineFunctional) -> AffineFunctional:
        """beta ∘ piece."""
        n = len(self.matrix[0])
        normal = tuple(sum((beta.normal[r] * self.matrix[r][j] for r in range(len(self.matrix))), Fraction(0)) for j in range(n))
        return AffineFunctional(normal, linalg.dot(beta.normal, self.offset) + beta.const)


def _solve_piece(cell: Simplex, values: Mapping[Point, Point], codomain: int) -> AffinePiece:
    """Integer solution of den(v)·(v,1)·X = den(v)·value(v) through the Smith decomposition."""
    rows = cell.homogeneous_rows
    n = cell.ambient
    diag, P, Q = linalg.smith(rows)
    targets = []
    for v in cell.vertices:
        d = den(v)
        t = [d * c for c in values[v]]
        if any(x.denominator != 1 for x in t):
            raise DivisibilityError(f"den of value {values[v]} does not divide den({v}) = {d}", vertex=v)
        targets.append([int(x) for x in t])
    pt = [[sum(P[i][r] * targets[r][c] for r in range(len(rows))) for c in range(codomain)] for i in range(len(rows))]
    y = []
    for i in range(n + 1):
        if i < len(diag):
            if any(x % diag[i] for x in pt[i]):
                raise NonIntegerPiece(f"no integer affine piece on {cell}")
            y.append([x // diag[i] for x in pt[i]])
        else:
            y.append([0] * codomain)
    x = [[sum(Q[r][i] * y[i][c] for i in range(n + 1)) for c in range(codomain)] for r in range(n + 1)]
    piece = AffinePiece(
        tuple(tuple(x[r][c] for r in range(n)) for c in range(codomain)),
        tuple(x[n][c] for c in range(codomain)),
    )
    for v in cell.vertices:
        if piece(v) != tuple(values[v]):
            raise NonIntegerPiece(f"affine piece on {cell} misses the value at {v}")
    return piece


@dataclass(frozen=True, eq=False)
class ZMap:
    """Continuous map, affine with integer coefficients on every cell of a regular carrier."""

    carrier: SimplicialComplex
    values: Mapping[Point, Point]
    codomain: int
    pieces: Mapping[Simplex, AffinePiece] = field(default_factory=dict, repr=False)
    _cache: Dict[Point, Point] = field(default_factory=dict, repr=False)

    @property
    def ambient(self) -> int:
        return self.carrier.ambient

    def piece(self, cell: Simplex) -> AffinePiece:
        """Affine piece of a maximal carrier cell."""
        if cell not in self.pieces:
            raise PreconditionError(f"{cell} is not a maximal cell of the carrier")
        return self.pieces[cell]

    def cell_of(self, p: Sequence[Fraction]) -> Simplex:
        for s in self.carrier.maximal:
            if box_contains(s.bbox, p) and barycentric(s, p) is not None:
                return s
        raise OutsideDomain(f"{tuple(map(str, p))} is outside the domain")

    def evaluate(self, p: Sequence) -> Point:
        """Exact value at a rational point; float points take the numeric path."""
        if len(p) != self.ambient:
            raise DimensionMismatch(f"point of dimension {len(p)} vs domain in R^{self.ambient}")
        if any(isinstance(c, float) for c in p):
            return self.evaluate_float(p)
        p = exact(p)
        hit = self._cache.get(p)
        if hit is None:
            for s in self.carrier.maximal:
                if not box_contains(s.bbox, p):
                    continue
                t = barycentric(s, p)
                if t is not None:
                    hit = tuple(
                        sum((w * self.values[v][c] for w, v in zip(t, s.vertices)), Fraction(0))
                        for c in range(self.codomain)
                    )
                    break
            else:
                raise OutsideDomain(f"{tuple(map(linalg.fraction_str, p))} is outside the domain")
            self._cache[p] = hit
        return hit

    def evaluate_float(self, p: Sequence[float]) -> Tuple[float, ...]:
        q = exact(p)
        try:
            cell = self.cell_of(q)
        except OutsideDomain:
            q = tuple(c.limit_denominator(settings.rationalize_denominator) for c in q)
            cell = self.cell_of(q)
        return self.piece(cell).apply_float(p)

    def is_constant(self) -> bool:
        return len(set(self.values.values())) == 1


@dataclass(frozen=True, eq=False)
class McNaughtonFn(ZMap):
    """A Z-map [0,1]^n ⊇ domain → [0,1]."""

    def value(self, p: Sequence) -> Fraction:
        return self.evaluate(p)[0]


def extend_from_vertices(
    K: SimplicialComplex, vals: Mapping[Point, Sequence], mcnaughton: bool = False
) -> ZMap:
    """The unique Z-map on the regular complex K taking the given vertex values."""
    for s in K.maximal:
        if not is_regular(s):
            raise NonRegularCarrier(f"carrier cell {s} is not regular")
    values: Dict[Point, Point] = {}
    for v in K.vertices:
        if v not in vals:
            raise PreconditionError(f"no value for vertex {v}")
        raw = vals[v]
        val = (raw,) if not isinstance(raw, (tuple, list)) else tuple(raw)
        values[v] = tuple(linalg.to_fraction(c, name="vertex value") for c in val)
    codims = {len(x) for x in values.values()}
    if len(codims) != 1:
        raise DimensionMismatch("vertex values have different dimensions")
    codomain = codims.pop()
    for v, val in values.items():
        d = den(v)
        if d % den(val):
            raise DivisibilityError(f"den({val}) = {den(val)} does not divide den({v}) = {d}", vertex=v)
    if mcnaughton:
        if codomain != 1:
            raise DimensionMismatch("McNaughton functions are real valued")
        bad = next((v for v, val in values.items() if not 0 <= val[0] <= 1), None)
        if bad is not None:
            raise PreconditionError(f"value {values[bad][0]} at {bad} is outside [0,1]")
    pieces = {s: _solve_piece(s, values, codomain) for s in K.maximal}
    cls = McNaughtonFn if mcnaughton else ZMap
    log.debug("extended %d vertex values over %d cells", len(values), len(pieces))
    return cls(K, values, codomain, pieces)


def mcnaughton(K: SimplicialComplex, vals: Mapping[Point, Sequence]) -> McNaughtonFn:
    return extend_from_vertices(K, vals, mcnaughton=True)


def evaluate(f: ZMap, p: Sequence) -> Point:
    return f.evaluate(p)


def restrict_to_complex(eta: ZMap, K: SimplicialComplex) -> ZMap:
    """The same map re-expressed on a regular subdivision K of its carrier."""
    return extend_from_vertices(K, {v: eta.evaluate(v) for v in K.vertices}, mcnaughton=isinstance(eta, McNaughtonFn))


def _split_refinement(
    f: McNaughtonFn, g: McNaughtonFn, split: Callable[[Point], Fraction] | None
) -> SimplicialComplex:
    if f.ambient != g.ambient or not same_support(f.carrier, g.carrier):
        raise OutsideDomain("domain mismatch")
    builder = ComplexBuilder(common_refinement(f.carrier, g.carrier).maximal)
    if split is not None:
        builder.cut(split)
    _regularize_builder(builder)
    return builder.freeze()


def mv_combine(op: str, f: McNaughtonFn, g: McNaughtonFn | None = None) -> McNaughtonFn:
    """Pointwise ⊕ (truncated sum), ¬ (1 − f), ⊙, ∧ (min) or ∨ (max), as a McNaughton function."""
    name = MV_OPS.get(op)
    if name is None:
        raise PreconditionError(f"unknown MV operation {op!r}")
    if name == "neg":
        if g is not None:
            raise PreconditionError("negation takes a single function")
        return mcnaughton(f.carrier, {v: 1 - f.values[v][0] for v in f.carrier.vertices})
    if g is None:
        raise PreconditionError(f"{name} needs two functions")
    fv, gv = f.value, g.value
    split, combine = {
        "oplus": (lambda p: fv(p) + gv(p) - 1, lambda a, b: min(Fraction(1), a + b)),
        "odot": (lambda p: fv(p) + gv(p) - 1, lambda a, b: max(Fraction(0), a + b - 1)),
        "wedge": (lambda p: fv(p) - gv(p), min),
        "vee": (lambda p: fv(p) - gv(p), max),
    }[name]
    K = _split_refinement(f, g, split)
    return mcnaughton(K, {v: combine(fv(v), gv(v)) for v in K.vertices})


def pair_map(f: McNaughtonFn, g: McNaughtonFn) -> ZMap:
    """η = (f, g) on a common regular refinement of both carriers."""
    K = _split_refinement(f, g, None)
    return extend_from_vertices(K, {v: (f.value(v), g.value(v)) for v in K.vertices})


def preimage_polyhedron(eta: ZMap, R: Polyhedron) -> Polyhedron:
    """η^{-1}(R), cell by cell."""
    if R.ambient != eta.codomain:
        raise DimensionMismatch(f"polyhedron in R^{R.ambient} vs codomain R^{eta.codomain}")
    pieces: List[Simplex] = []
    if R.is_empty:
        return Polyhedron.empty(eta.ambient)
    funcs = {g: simplex_functionals(g) for g in R.generators}
    for cell in eta.carrier.maximal:
        images = [eta.values[v] for v in cell.vertices]
        img_box = tuple((min(col), max(col)) for col in zip(*images))
        piece = eta.piece(cell)
        for g in R.generators:
            if not boxes_overlap(g.bbox, img_box):
                continue
            ineq, eq = funcs[g]
            pieces.extend(restrict_to(cell, [piece.compose(b) for b in ineq], [piece.compose(b) for b in eq]))
    out = Polyhedron.of(pieces, eta.ambient)
    log.debug("preimage: %d generators -> %d simplexes", len(R.generators), len(out.generators))
    return out


def zero_set(f: ZMap) -> Polyhedron:
    origin = Simplex.trusted([tuple(Fraction(0) for _ in range(f.codomain))])
    return preimage_polyhedron(f, Polyhedron.of([origin]))


def in_maximal_ideal(f: McNaughtonFn, x: Sequence) -> bool:
    """f ∈ I_x, i.e. f(x) = 0."""
    return f.value(x) == 0


@dataclass(frozen=True)
class LeqResult:
    holds: bool
    witness: Point | None = None
    source: str | None = None

    def __bool__(self) -> bool:
        return self.holds


def _check_domain(f: ZMap, X: ClosedSet) -> None:
    if X.ambient != f.ambient:
        raise DimensionMismatch(f"closed set in R^{X.ambient} vs domain R^{f.ambient}")
    if X.polyhedral_part is not None and not X.polyhedral_part.is_empty:
        domain = Polyhedron.of(f.carrier.maximal)
        for T in X.polyhedral_part.generators:
            if not simplex_in_polyhedron(T, domain):
                raise OutsideDomain(f"{T} is outside the domain")


def _polyhedral_vertices(X: ClosedSet, maps: Sequence[ZMap]) -> List[Point]:
    """Vertices of a subdivision of X's polyhedral part on whose cells every map is affine."""
    if X.polyhedral_part is None or X.polyhedral_part.is_empty:
        return []
    out: List[Point] = []
    for T in X.polyhedral_part.generators:
        builder = ComplexBuilder([T])
        for eta in maps:
            for cell in eta.carrier.maximal:
                if boxes_overlap(cell.bbox, T.bbox):
                    ineq, eq = simplex_functionals(cell)
                    builder.cut_by(ineq + eq)
        out.extend(sorted({v for c in builder.cells for v in c.vertices}))
    return out


def leq_scalar_multiple(f: McNaughtonFn, g: McNaughtonFn, m: int, X: ClosedSet) -> LeqResult:
    """Whether f ≤ m·g on X; otherwise the first violating point."""
    if m < 1:
        raise PreconditionError("m must be a positive integer")
    _check_domain(f, X)
    _check_domain(g, X)
    for v in _polyhedral_vertices(X, (f, g)):
        if f.value(v) > m * g.value(v):
            return LeqResult(False, v, "polyhedral")
    for p in X.iter_points():
        if f.value(p) > m * g.value(p):
            return LeqResult(False, p, "sample")
    return LeqResult(True)


def same_zero_behaviour(f: McNaughtonFn, g: McNaughtonFn, X: ClosedSet) -> bool:
    """X ∩ Zf = X ∩ Zg: f and g lie in exactly the same maximal ideals of McN(X)."""
    if X.polyhedral_part is not None and not X.polyhedral_part.is_empty:
        a = intersect_polyhedra(zero_set(f), X.polyhedral_part)
        b = intersect_polyhedra(zero_set(g), X.polyhedral_part)
        if not polyhedra_equal(a, b):
            return False
    return all((f.value(p) == 0) == (g.value(p) == 0) for p in X.iter_points())

