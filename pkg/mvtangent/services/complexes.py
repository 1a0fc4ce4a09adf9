"""
Simplicial complexes stored by their maximal cells, plus the mutable workspace used by every
subdivision: stellar blow-ups and edge-splitting cuts along affine functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Sequence, Set, Tuple

from ..core.config import settings
from ..core.exceptions import BlowupBudgetExceeded, DimensionMismatch, PointOutsideSimplex, PreconditionError
from ..core.logger import get_logger
from . import linalg
from .geometry import AffineFunctional, Point, Simplex, barycentric, smallest_containing_face

log = get_logger("complexes")

Box = Tuple[Tuple[Fraction, Fraction], ...]


def boxes_overlap(a: Box, b: Box) -> bool:
    return all(lo1 <= hi2 and lo2 <= hi1 for (lo1, hi1), (lo2, hi2) in zip(a, b))


def box_contains(box: Box, p: Sequence[Fraction]) -> bool:
    return all(lo <= c <= hi for (lo, hi), c in zip(box, p))


def drop_faces(simplexes: Iterable[Simplex]) -> List[Simplex]:
    """Deduplicate and drop every simplex that is a face of another one; sorted canonically."""
    uniq = sorted(set(simplexes), key=lambda s: (-len(s), s.vertices))
    kept: List[Simplex] = []
    by_vertex: Dict[Point, List[Simplex]] = {}
    for s in uniq:
        if any(s.vertex_set <= t.vertex_set for t in by_vertex.get(s.vertices[0], ())):
            continue
        kept.append(s)
        for v in s.vertices:
            by_vertex.setdefault(v, []).append(s)
    return sorted(kept, key=lambda s: s.vertices)


@dataclass(frozen=True)
class SimplicialComplex:
    """A complex given by its maximal cells; `cells` is the face closure."""

    maximal: Tuple[Simplex, ...]

    def __post_init__(self) -> None:
        if not self.maximal:
            raise PreconditionError("a simplicial complex needs at least one cell")
        n = self.maximal[0].ambient
        if any(s.ambient != n for s in self.maximal):
            raise DimensionMismatch("cells live in different ambient dimensions")

    @classmethod
    def of(cls, simplexes: Iterable[Simplex]) -> "SimplicialComplex":
        return cls(tuple(drop_faces(simplexes)))

    @property
    def ambient(self) -> int:
        return self.maximal[0].ambient

    @property
    def dim(self) -> int:
        return max(s.dim for s in self.maximal)

    def __len__(self) -> int:
        return len(self.maximal)

    @cached_property
    def cells(self) -> Tuple[Simplex, ...]:
        out: Set[Simplex] = set()
        for s in self.maximal:
            out.update(s.faces())
        return tuple(sorted(out, key=lambda s: (s.dim, s.vertices)))

    @cached_property
    def vertices(self) -> Tuple[Point, ...]:
        return tuple(sorted({v for s in self.maximal for v in s.vertices}))

    @cached_property
    def bbox(self) -> Box:
        return tuple(
            (min(s.bbox[i][0] for s in self.maximal), max(s.bbox[i][1] for s in self.maximal))
            for i in range(self.ambient)
        )

    def locate(self, p: Sequence[Fraction]) -> List[Simplex]:
        """Maximal cells containing p."""
        if len(p) != self.ambient:
            raise DimensionMismatch(f"point of dimension {len(p)} vs complex in R^{self.ambient}")
        return [s for s in self.maximal if box_contains(s.bbox, p) and barycentric(s, p) is not None]

    def contains(self, p: Sequence[Fraction]) -> bool:
        if not box_contains(self.bbox, p):
            return False
        return any(box_contains(s.bbox, p) and barycentric(s, p) is not None for s in self.maximal)

    def carrier_of(self, p: Sequence[Fraction]) -> Simplex:
        """The unique cell whose relative interior contains p."""
        found = self.locate(p)
        if not found:
            raise PointOutsideSimplex(f"{tuple(map(linalg.fraction_str, p))} is outside the complex")
        return smallest_containing_face(found[0], p)


def volume_ratio(outer: Simplex, inner: Simplex) -> Fraction:
    """vol(inner)/vol(outer) for an inner simplex of the same dimension lying in outer."""
    rows = []
    for v in inner.vertices:
        t = barycentric(outer, v)
        if t is None:
            raise PointOutsideSimplex(f"{v} is not in {outer}")
        rows.append(t)
    return abs(linalg.det(rows))


def covers(outer: Simplex, cells: Iterable[Simplex]) -> bool:
    """True iff the same-dimensional cells lying inside `outer` fill it (cells must form a complex)."""
    total = Fraction(0)
    for c in cells:
        if c.dim != outer.dim or not boxes_overlap(c.bbox, outer.bbox):
            continue
        if all(barycentric(outer, v) is not None for v in c.vertices):
            total += volume_ratio(outer, c)
    return total == 1


class ComplexBuilder:
    """Mutable set of maximal cells with a vertex index; every change is a stellar blow-up."""

    def __init__(self, cells: Iterable[Simplex], budget: int | None = None) -> None:
        self.cells: Set[Simplex] = set()
        self.index: Dict[Point, Set[Simplex]] = {}
        self.blowups = 0
        self.budget = settings.blowup_budget if budget is None else budget
        for c in cells:
            self.add(c)

    def add(self, s: Simplex) -> None:
        self.cells.add(s)
        for v in s.vertices:
            self.index.setdefault(v, set()).add(s)

    def remove(self, s: Simplex) -> None:
        self.cells.discard(s)
        for v in s.vertices:
            self.index[v].discard(s)

    def star(self, face: Sequence[Point]) -> Set[Simplex]:
        sets = [self.index.get(v, set()) for v in face]
        return set.intersection(*sets) if sets else set()

    def blowup(self, face: Sequence[Point], p: Point) -> List[Simplex]:
        """Stellar subdivision at p, where p lies in the relative interior of the cell `face`."""
        if p in face:
            return []
        self.blowups += 1
        if self.blowups > self.budget:
            raise BlowupBudgetExceeded(f"more than {self.budget} blow-ups")
        new: List[Simplex] = []
        for c in sorted(self.star(face), key=lambda s: s.vertices):
            self.remove(c)
            for w in face:
                s = Simplex.trusted([v for v in c.vertices if v != w] + [p])
                self.add(s)
                new.append(s)
        return new

    def blowup_at(self, p: Point) -> List[Simplex]:
        for c in sorted(self.cells, key=lambda s: s.vertices):
            if box_contains(c.bbox, p) and barycentric(c, p) is not None:
                return self.blowup(smallest_containing_face(c, p).vertices, p)
        raise PointOutsideSimplex(f"{tuple(map(linalg.fraction_str, p))} is outside the complex")

    def cut(self, fn: Callable[[Point], Fraction], region: Box | None = None) -> int:
        """
        Split every edge on which fn changes sign strictly, at its zero.

        fn must be affine on each cell touched. Afterwards no cell meeting `region` has vertices
        of strictly opposite signs. Returns the number of split edges.

        Edges are collected before any split. Blowing up at a point of edge (a, b) keeps every
        other edge (c, d): the new cell dropping an endpoint of (a, b) outside {c, d} still holds it.
        Split points get value 0, so sign changes of the remaining edges are read from `values`.
        """
        values: Dict[Point, Fraction] = {}

        def val(v: Point) -> Fraction:
            if v not in values:
                values[v] = fn(v)
            return values[v]

        edges = set()
        for c in self.cells:
            if region is not None and not boxes_overlap(c.bbox, region):
                continue
            for a, b in combinations(c.vertices, 2):
                fa, fb = val(a), val(b)
                if (fa < 0 < fb) or (fb < 0 < fa):
                    edges.add((a, b))
        for a, b in sorted(edges):
            fa, fb = values[a], values[b]
            t = fa / (fa - fb)
            p = tuple(x + t * (y - x) for x, y in zip(a, b))
            values[p] = Fraction(0)
            self.blowup((a, b), p)
        return len(edges)

    def cut_by(self, functionals: Iterable[AffineFunctional], region: Box | None = None) -> int:
        total = 0
        for beta in functionals:
            if all(c == 0 for c in beta.normal):
                continue
            total += self.cut(beta, region)
        return total

    def freeze(self) -> SimplicialComplex:
        return SimplicialComplex(tuple(sorted(self.cells, key=lambda s: s.vertices)))


def restrict_to(
    cell: Simplex,
    inequalities: Sequence[AffineFunctional],
    equations: Sequence[AffineFunctional] = (),
) -> List[Simplex]:
    """
    Triangulate cell ∩ {β ≥ 0 for the inequalities, β = 0 for the equations}.

    The cell is cut along every functional; each piece then meets the region in one of its faces.
    """
    builder = ComplexBuilder([cell])
    builder.cut_by(list(inequalities) + list(equations))
    out = []
    for piece in builder.cells:
        good = [
            v for v in piece.vertices
            if all(b(v) >= 0 for b in inequalities) and all(b(v) == 0 for b in equations)
        ]
        if good:
            out.append(Simplex.trusted(good))
    return drop_faces(out)
