"""
Closed sets X given as an exact polyhedral part plus finitely many sampled sequences with their
limit points, and the closed-form sequences used to regenerate samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence, Tuple

import numpy as np

from ..core.exceptions import DimensionMismatch, PreconditionError
from ..core.logger import get_logger
from .geometry import Point, in_unit_cube
from .linalg import to_fraction
from .polyhedra import Polyhedron

log = get_logger("closed_sets")

Term = Tuple[Fraction, int]


def exact(p: Sequence) -> Point:
    """Rational copy of a sample point; floats convert exactly."""
    return tuple(c if isinstance(c, Fraction) else to_fraction(c, allow_float=True) for c in p)


@dataclass(frozen=True)
class SequenceFormula:
    """i ↦ (Σ c·i^(-p) over the terms of each coordinate) for i = start, start+step, … < stop."""

    coordinates: Tuple[Tuple[Term, ...], ...]
    start: int = 1
    stop: int = 100
    step: int = 1

    def __post_init__(self) -> None:
        coords = tuple(tuple((to_fraction(c, name="coefficient"), int(p)) for c, p in terms) for terms in self.coordinates)
        if not coords:
            raise PreconditionError("a sequence formula needs at least one coordinate")
        if any(p < 0 for terms in coords for _, p in terms):
            raise PreconditionError("powers must be nonnegative")
        if not any(p > 0 and c != 0 for terms in coords for c, p in terms):
            raise PreconditionError("a constant formula has no point different from its limit")
        if self.start < 1 or self.step < 1:
            raise PreconditionError("start and step must be positive")
        object.__setattr__(self, "coordinates", coords)

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def term(self, i: int) -> Point:
        return tuple(sum((c / Fraction(i) ** p for c, p in terms), Fraction(0)) for terms in self.coordinates)

    def limit(self) -> Point:
        return tuple(sum((c for c, p in terms if p == 0), Fraction(0)) for terms in self.coordinates)

    def indices(self) -> range:
        return range(self.start, self.stop, self.step)

    def generate(self) -> Tuple[Point, ...]:
        return tuple(self.term(i) for i in self.indices())

    def every(self, step: int, offset: int = 0) -> "SequenceFormula":
        return SequenceFormula(self.coordinates, self.start + offset * self.step, self.stop, self.step * step)


@dataclass(frozen=True)
class PointSequence:
    """Finitely many terms x_1, x_2, … of a sequence converging to `limit`."""

    points: Tuple[tuple, ...]
    limit: Point
    formula: SequenceFormula | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.points:
            raise PreconditionError("a sequence needs at least one point")
        object.__setattr__(self, "points", tuple(tuple(p) for p in self.points))
        n = len(self.limit)
        if any(len(p) != n for p in self.points):
            raise DimensionMismatch("sequence points and limit have different dimensions")
        limit = tuple(to_fraction(c, name="limit") for c in self.limit)
        object.__setattr__(self, "limit", limit)
        for i, p in enumerate(self.points):
            if exact(p) == limit:
                raise PreconditionError(f"sequence point {i} equals the limit")
        d = self.distances
        tail = d[len(d) - max(2, len(d) // 4):]
        if len(tail) > 1 and np.any(np.diff(tail) > 1e-12 * tail[:-1]):
            raise PreconditionError("sequence tail does not approach the limit monotonically")

    @classmethod
    def from_formula(cls, formula: SequenceFormula) -> "PointSequence":
        return cls(formula.generate(), formula.limit(), formula)

    @property
    def dim(self) -> int:
        return len(self.limit)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([[float(c) for c in p] for p in self.points], dtype=float)

    @cached_property
    def distances(self) -> np.ndarray:
        lim = np.array([float(c) for c in self.limit])
        return np.linalg.norm(self.array - lim, axis=1)

    @cached_property
    def exact_points(self) -> Tuple[Point, ...]:
        return tuple(exact(p) for p in self.points)

    def tail_start(self, fraction: float) -> int:
        return len(self.points) - max(2, int(np.ceil(len(self.points) * fraction)))

    def subsequence(self, step: int, offset: int = 0) -> "PointSequence":
        formula = self.formula.every(step, offset) if self.formula is not None else None
        return PointSequence(self.points[offset::step], self.limit, formula)


@dataclass(frozen=True)
class ClosedSet:
    """polyhedral_part ∪ sample points ∪ sample limits ∪ declared limits."""

    polyhedral_part: Polyhedron | None = None
    samples: Tuple[PointSequence, ...] = ()
    declared_limits: Tuple[Point, ...] = ()

    def __post_init__(self) -> None:
        dims = {s.dim for s in self.samples} | {len(p) for p in self.declared_limits}
        if self.polyhedral_part is not None:
            dims.add(self.polyhedral_part.ambient)
        if len(dims) > 1:
            raise DimensionMismatch(f"closed set parts have dimensions {sorted(dims)}")
        if not dims:
            raise PreconditionError("a closed set needs at least one part")
        object.__setattr__(self, "declared_limits", tuple(exact(p) for p in self.declared_limits))

    @property
    def ambient(self) -> int:
        if self.polyhedral_part is not None:
            return self.polyhedral_part.ambient
        return self.samples[0].dim if self.samples else len(self.declared_limits[0])

    def limits(self) -> Tuple[Point, ...]:
        out = []
        for p in list(self.declared_limits) + [s.limit for s in self.samples]:
            if p not in out:
                out.append(p)
        return tuple(out)

    def iter_points(self) -> Iterator[Point]:
        """Exact sample points in sequence order, then all limits."""
        for s in self.samples:
            yield from s.exact_points
        yield from self.limits()

    def point_count(self) -> int:
        return sum(len(s) for s in self.samples) + len(self.limits())

    def in_unit_cube(self) -> bool:
        if self.polyhedral_part is not None and not all(in_unit_cube(v) for v in self.polyhedral_part.vertices):
            return False
        return all(in_unit_cube(p) for p in self.iter_points())

    def with_points(self, *points: Sequence) -> "ClosedSet":
        return ClosedSet(self.polyhedral_part, self.samples, self.declared_limits + tuple(exact(p) for p in points))
