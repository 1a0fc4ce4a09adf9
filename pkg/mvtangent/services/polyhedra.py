"""
Rational polyhedra as finite unions of simplexes, with exact set operations.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple

from ..core.exceptions import DimensionMismatch, PreconditionError
from ..core.logger import get_logger
from .complexes import Box, ComplexBuilder, box_contains, boxes_overlap, drop_faces, restrict_to
from .geometry import Point, Simplex, contains, simplex_functionals

log = get_logger("polyhedra")


@dataclass(frozen=True)
class Polyhedron:
    """P = T_1 ∪ ⋯ ∪ T_l. An empty generator tuple is the explicit empty polyhedron of R^ambient."""

    generators: Tuple[Simplex, ...]
    ambient: int

    def __post_init__(self) -> None:
        if self.ambient < 1:
            raise DimensionMismatch("ambient dimension must be positive")
        if any(g.ambient != self.ambient for g in self.generators):
            raise DimensionMismatch("generators live in different ambient dimensions")

    @classmethod
    def of(cls, generators: Iterable[Simplex], ambient: int | None = None) -> "Polyhedron":
        gens = drop_faces(generators)
        if ambient is None:
            if not gens:
                raise PreconditionError("an empty polyhedron needs an explicit ambient dimension")
            ambient = gens[0].ambient
        return cls(tuple(gens), ambient)

    @classmethod
    def empty(cls, ambient: int) -> "Polyhedron":
        return cls((), ambient)

    @property
    def is_empty(self) -> bool:
        return not self.generators

    @cached_property
    def bbox(self) -> Box | None:
        if self.is_empty:
            return None
        return tuple(
            (min(g.bbox[i][0] for g in self.generators), max(g.bbox[i][1] for g in self.generators))
            for i in range(self.ambient)
        )

    @cached_property
    def vertices(self) -> Tuple[Point, ...]:
        return tuple(sorted({v for g in self.generators for v in g.vertices}))

    def overlapping(self, box: Box) -> List[Simplex]:
        return [g for g in self.generators if boxes_overlap(g.bbox, box)]


def polyhedron_contains_point(P: Polyhedron, p: Sequence) -> bool:
    if len(p) != P.ambient:
        raise DimensionMismatch(f"point of dimension {len(p)} vs polyhedron in R^{P.ambient}")
    if P.is_empty or not box_contains(P.bbox, p):
        return False
    return any(box_contains(g.bbox, p) and contains(g, p) for g in P.generators)


def intersect_simplexes(a: Simplex, b: Simplex) -> List[Simplex]:
    """a ∩ b as a list of simplexes (empty list when disjoint)."""
    if not boxes_overlap(a.bbox, b.bbox):
        return []
    if all(contains(b, v) for v in a.vertices):
        return [a]
    if all(contains(a, v) for v in b.vertices):
        return [b]
    ineq, eq = simplex_functionals(b)
    return restrict_to(a, ineq, eq)


def simplex_in_polyhedron(S: Simplex, P: Polyhedron) -> bool:
    """Exact test S ⊆ P: cut S along every nearby generator, then each piece must sit in one generator."""
    if P.is_empty:
        return False
    gens = P.overlapping(S.bbox)
    if not gens:
        return False
    for g in gens:
        if all(contains(g, v) for v in S.vertices):
            return True
    builder = ComplexBuilder([S])
    for g in gens:
        ineq, eq = simplex_functionals(g)
        builder.cut_by(ineq + eq)
    for piece in builder.cells:
        if not any(all(contains(g, v) for v in piece.vertices) for g in gens):
            return False
    return True


def polyhedron_subset(P: Polyhedron, Q: Polyhedron) -> bool:
    return all(simplex_in_polyhedron(g, Q) for g in P.generators)


def polyhedra_equal(P: Polyhedron, Q: Polyhedron) -> bool:
    if P.ambient != Q.ambient:
        raise DimensionMismatch("polyhedra in different ambient dimensions")
    return polyhedron_subset(P, Q) and polyhedron_subset(Q, P)


def intersect_polyhedra(P: Polyhedron, Q: Polyhedron) -> Polyhedron:
    if P.ambient != Q.ambient:
        raise DimensionMismatch("polyhedra in different ambient dimensions")
    pieces: List[Simplex] = []
    for a in P.generators:
        for b in Q.overlapping(a.bbox):
            pieces.extend(intersect_simplexes(a, b))
    return Polyhedron.of(pieces, P.ambient)
