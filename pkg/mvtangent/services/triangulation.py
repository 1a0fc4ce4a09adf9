"""
Triangulations of rational polyhedra: validation, stellar blow-ups, regularization, and
subdivisions adapted to a subpolyhedron or to a Z-map.
"""
from __future__ import annotations

import heapq
import random
from fractions import Fraction
from itertools import permutations, product
from math import prod
from typing import TYPE_CHECKING, Iterable, List, Sequence, Tuple

from ..core.exceptions import DimensionMismatch, NotAComplex, NotContained, OutsideDomain
from ..core.logger import get_logger
from . import linalg
from .complexes import ComplexBuilder, SimplicialComplex, boxes_overlap, covers, drop_faces
from .geometry import (
    Point,
    Simplex,
    contains,
    den,
    elementary_divisors,
    is_regular,
    point,
    simplex_functionals,
    smallest_containing_face,
)
from .polyhedra import Polyhedron, intersect_simplexes, simplex_in_polyhedron

if TYPE_CHECKING:
    from .mcnaughton import ZMap

log = get_logger("triangulation")


def _separated(a: Simplex, b: Simplex) -> bool:
    """Some functional of a is ≥ 0 on a and ≤ 0 on b, with the same zero vertices on both sides."""
    ineq, eq = a.functionals
    for beta in ineq + eq + tuple(e.negated() for e in eq):
        vb = [beta(v) for v in b.vertices]
        if all(x <= 0 for x in vb):
            zero_b = {v for v, x in zip(b.vertices, vb) if x == 0}
            zero_a = {v for v in a.vertices if beta(v) == 0}
            if zero_a == zero_b or not zero_a or not zero_b:
                return True
    return False


def _common_face_ok(a: Simplex, b: Simplex) -> bool:
    """Whether a ∩ b is the (possibly empty) face spanned by their common vertices."""
    if _separated(a, b) or _separated(b, a):
        return True
    common = a.vertex_set & b.vertex_set
    pieces = intersect_simplexes(a, b)
    if not pieces:
        return not common
    if not common:
        return False
    face = Simplex.trusted(common)
    return all(contains(face, v) for piece in pieces for v in piece.vertices)


def validate_complex(cells: Iterable[Simplex]) -> SimplicialComplex:
    """Face-closed complex generated by `cells`, or NotAComplex naming the first bad pair."""
    cells = list(cells)
    if not cells:
        raise NotAComplex("no cells given")
    n = cells[0].ambient
    if any(c.ambient != n for c in cells):
        raise DimensionMismatch("cells live in different ambient dimensions")
    maximal = drop_faces(cells)
    log.debug("validating %d maximal cells", len(maximal))
    # sweep along the first coordinate; only cells with overlapping boxes are compared
    active: List[Simplex] = []
    for b in sorted(maximal, key=lambda s: (s.bbox[0][0], s.vertices)):
        lo = b.bbox[0][0]
        active = [a for a in active if a.bbox[0][1] >= lo]
        for a in active:
            if boxes_overlap(a.bbox, b.bbox) and not _common_face_ok(a, b):
                raise NotAComplex(f"not a common face: {a} and {b}", pair=(a, b))
        active.append(b)
    return SimplicialComplex(tuple(maximal))


def same_support(K: SimplicialComplex, L: SimplicialComplex) -> bool:
    return all(simplex_in_polyhedron(s, Polyhedron.of(L.maximal)) for s in K.maximal) and all(
        simplex_in_polyhedron(s, Polyhedron.of(K.maximal)) for s in L.maximal
    )


def is_subdivision(fine: SimplicialComplex, coarse: SimplicialComplex) -> bool:
    """Every fine cell lies in a coarse cell and the fine cells fill every coarse maximal cell."""
    if fine.ambient != coarse.ambient:
        raise DimensionMismatch("complexes in different ambient dimensions")
    for s in fine.maximal:
        if not any(
            boxes_overlap(s.bbox, c.bbox) and all(contains(c, v) for v in s.vertices) for c in coarse.maximal
        ):
            return False
    fine_cells = fine.cells
    return all(covers(c, fine_cells) for c in coarse.maximal)


def stellar_blowup(K: SimplicialComplex, p: Sequence) -> SimplicialComplex:
    p = point(p)
    builder = ComplexBuilder(K.maximal)
    builder.blowup_at(p)
    return builder.freeze()


FAREY_ENUMERATION_CAP = 4096


def _cone_coefficients(s: Simplex) -> Iterable[Tuple[Fraction, ...]]:
    """
    Coefficient vectors t ∈ [0,1)^k of the nonzero classes of saturation/lattice for the rows
    den(v_i)·(v_i, 1); every t·rows is an integer vector of the cone over s.
    """
    rows = s.homogeneous_rows
    diag, P, _ = linalg.smith(rows)
    gens = [(d, [Fraction(P[j][i], d) for i in range(len(rows))]) for j, d in enumerate(diag) if d > 1]
    if prod(d for d, _ in gens) <= FAREY_ENUMERATION_CAP:
        for mult in product(*(range(d) for d, _ in gens)):
            if any(mult):
                yield tuple(
                    sum((a * g[i] for a, (_, g) in zip(mult, gens)), Fraction(0)) % 1 for i in range(len(rows))
                )
    else:
        # too many classes: the cyclic subgroups of the invariant factors only
        for d, g in gens:
            for a in range(1, d):
                yield tuple((a * c) % 1 for c in g)


def farey_point(s: Simplex) -> Point | None:
    """
    The rational point of s of least denominator whose homogeneous vector lies in the saturation
    of the lattice spanned by den(v_i)(v_i, 1) but not in the lattice itself; None when s is
    regular. Ties go to the lexicographically least point.
    """
    if is_regular(s):
        return None
    rows = s.homogeneous_rows
    best: Tuple[int, Point] | None = None
    for t in _cone_coefficients(s):
        h = [sum((c * w[r] for c, w in zip(t, rows)), Fraction(0)) for r in range(len(rows[0]))]
        last = h[-1]
        p = tuple(x / last for x in h[:-1])
        key = (den(p), p)
        if best is None or key < best:
            best = key
    return best[1]


def _regularize_builder(builder: ComplexBuilder, seed: int = 0) -> None:
    rng = random.Random(seed) if seed else None
    counter = 0
    heap: List[Tuple] = []

    def push(s: Simplex) -> None:
        nonlocal counter
        counter += 1
        heapq.heappush(heap, (rng.random() if rng else 0, s.vertices, counter, s))

    for s in builder.cells:
        push(s)
    while heap:
        *_, s = heapq.heappop(heap)
        if s not in builder.cells or is_regular(s):
            continue
        p = farey_point(s)
        face = smallest_containing_face(s, p)
        log.debug("blow-up of %s at %s (divisors %s)", s, p, elementary_divisors(s))
        for new in builder.blowup(face.vertices, p):
            push(new)


def regularize(K: SimplicialComplex, seed: int = 0) -> SimplicialComplex:
    """Regular subdivision of K by Farey blow-ups, least non-regular cell first (seed 0)."""
    builder = ComplexBuilder(K.maximal)
    _regularize_builder(builder, seed)
    if builder.blowups:
        log.info("regularize: %d blow-ups, %d -> %d maximal cells", builder.blowups, len(K), len(builder.cells))
    return builder.freeze()


def _cut_along_polyhedron(builder: ComplexBuilder, Q: Polyhedron) -> None:
    for g in Q.generators:
        ineq, eq = simplex_functionals(g)
        builder.cut_by(ineq + eq, region=g.bbox)


def union_property_holds(K: SimplicialComplex, Q: Polyhedron) -> bool:
    """Q = ∪{S ∈ K | S ⊆ Q}."""
    inside = [c for c in K.cells if all(any(contains(g, v) for g in Q.generators) for v in c.vertices)]
    inside = [c for c in inside if simplex_in_polyhedron(c, Q)]
    return all(covers(g, inside) for g in Q.generators)


def subdivide_with_subpolyhedron(K: SimplicialComplex, Q: Polyhedron, seed: int = 0) -> SimplicialComplex:
    """Regular subdivision of K in which Q is the union of the cells it contains."""
    if Q.ambient != K.ambient:
        raise DimensionMismatch("polyhedron and complex in different ambient dimensions")
    builder = ComplexBuilder(K.maximal)
    _cut_along_polyhedron(builder, Q)
    cut = builder.freeze()
    for g in Q.generators:
        if not covers(g, [c for c in cut.cells if c.dim == g.dim]):
            raise NotContained(f"{g} is not contained in the support of the complex")
    _regularize_builder(builder, seed)
    out = builder.freeze()
    log.info("subdivide: %d generators, %d -> %d maximal cells", len(Q.generators), len(K), len(out))
    return out


def common_refinement(K: SimplicialComplex, L: SimplicialComplex) -> SimplicialComplex:
    """Subdivision of K whose every cell lies inside a cell of L (|K| ⊆ |L| assumed)."""
    builder = ComplexBuilder(K.maximal)
    for c in L.maximal:
        if not boxes_overlap(c.bbox, K.bbox):
            continue
        ineq, eq = simplex_functionals(c)
        builder.cut_by(ineq + eq, region=c.bbox)
    return builder.freeze()


def cells_inside(K: SimplicialComplex, L: SimplicialComplex) -> bool:
    """Whether every maximal cell of K lies in a single maximal cell of L."""
    return all(
        any(boxes_overlap(s.bbox, c.bbox) and all(contains(c, v) for v in s.vertices) for c in L.maximal)
        for s in K.maximal
    )


def refine_linear_on(K: SimplicialComplex, eta: "ZMap", seed: int = 0) -> SimplicialComplex:
    """Regular subdivision of K on whose cells eta is affine."""
    carrier = eta.carrier
    if K.ambient != carrier.ambient:
        raise DimensionMismatch("complex and map domain in different ambient dimensions")
    domain = Polyhedron.of(carrier.maximal)
    for s in K.maximal:
        if not simplex_in_polyhedron(s, domain):
            raise OutsideDomain(f"{s} is outside the domain of the map")
    if cells_inside(K, carrier):
        return regularize(K, seed)
    if cells_inside(carrier, K) and is_subdivision(carrier, K):
        return regularize(carrier, seed)
    return regularize(common_refinement(K, carrier), seed)


def cube_triangulation(n: int) -> SimplicialComplex:
    """The n! unimodular simplexes conv(0, e_σ1, e_σ1+e_σ2, …) of [0,1]^n."""
    if n < 1:
        raise DimensionMismatch("cube dimension must be positive")
    cells = []
    for sigma in permutations(range(n)):
        cur = [Fraction(0)] * n
        verts = [tuple(cur)]
        for i in sigma:
            cur[i] = Fraction(1)
            verts.append(tuple(cur))
        cells.append(Simplex.trusted(verts))
    return SimplicialComplex.of(cells)


def support(K: SimplicialComplex) -> Polyhedron:
    return Polyhedron.of(K.maximal)

