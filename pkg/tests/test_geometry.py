import random
from fractions import Fraction as Q
from itertools import combinations
from math import gcd

import pytest

from mvtangent.core.exceptions import DegenerateSimplex, DimensionMismatch, FrameError, PointOutsideSimplex
from mvtangent.services.geometry import (
    CSimplexSpec,
    DirectionFrame,
    Simplex,
    barycentric,
    build_c_simplex,
    c_simplex_contains,
    contains,
    den,
    elementary_divisors,
    homogeneous,
    intersect_c_simplexes,
    is_regular,
    multiplicity,
    relint_contains,
    simplex_functionals,
    simplex_hyperplanes,
    smallest_containing_face,
)
from mvtangent.services.linalg import det


def _minor_gcd(rows):
    """gcd of the maximal minors of an integer matrix with independent rows."""
    k = len(rows)
    g = 0
    for cols in combinations(range(len(rows[0])), k):
        g = gcd(g, int(det([[r[c] for c in cols] for r in rows])))
    return g


def _random_simplex(rng):
    n = rng.randint(1, 4)
    m = rng.randint(0, n)
    pts = []
    for _ in range(m + 1):
        pts.append(tuple(Q(rng.randint(0, d), d) for d in (rng.randint(1, 8) for _ in range(n))))
    return Simplex.of(pts)


def test_bad_simplex_divisor():
    s = Simplex.of([(0, 0), (1, 0), (1, 2)])
    assert elementary_divisors(s) == (1, 1, 2)
    assert multiplicity(s) == 2
    assert not is_regular(s)


def test_regular_examples():
    assert is_regular(Simplex.of([(0, 0), (1, 0), (1, 1)]))
    assert is_regular(Simplex.of([(0, 0), (Q(1, 2), 0)]))
    assert is_regular(Simplex.of([(Q(1, 2), Q(1, 2))]))
    assert not is_regular(Simplex.of([(Q(1, 3),), (Q(2, 3),)]))


def test_homogeneous_is_primitive():
    v = (Q(1, 2), Q(1, 3))
    assert den(v) == 6
    assert homogeneous(v) == (3, 2, 6)


def test_regularity_agrees_with_minor_oracle():
    rng = random.Random(7)
    checked = 0
    while checked < 500:
        try:
            s = _random_simplex(rng)
        except DegenerateSimplex:
            continue
        assert is_regular(s) == (_minor_gcd(s.homogeneous_rows) == 1)
        checked += 1


def test_canonical_order_and_validation():
    a = Simplex.of([(1, 0), (0, 0), (0, 1)])
    b = Simplex.of([(0, 1), (1, 0), (0, 0)])
    assert a == b
    assert a.vertices[0] == (0, 0)
    with pytest.raises(DegenerateSimplex):
        Simplex.of([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(DegenerateSimplex):
        Simplex.of([(0, 0), (0, 0)])
    with pytest.raises(DimensionMismatch):
        Simplex.of([(0, 0), (1, 0, 0)])


def test_barycentric_and_faces():
    s = Simplex.of([(0, 0), (1, 0), (0, 1)])
    assert barycentric(s, (Q(1, 4), Q(1, 4))) == (Q(1, 2), Q(1, 4), Q(1, 4))
    assert not contains(s, (1, 1))
    assert smallest_containing_face(s, (Q(1, 2), 0)) == Simplex.of([(0, 0), (1, 0)])
    assert relint_contains(s, (Q(1, 4), Q(1, 4)))
    assert not relint_contains(s, (Q(1, 2), 0))
    with pytest.raises(PointOutsideSimplex):
        smallest_containing_face(s, (1, 1))
    assert len(s.faces()) == 7


def test_functionals_of_segment():
    seg = Simplex.of([(0, 0), (1, 0)])
    ineq, eq = simplex_functionals(seg)
    assert len(ineq) == 2 and len(eq) == 1
    assert eq[0]((Q(1, 2), 0)) == 0
    assert eq[0]((0, 1)) != 0
    assert all(b((Q(1, 2), 0)) == Q(1, 2) for b in ineq)


def test_triangle_hyperplanes():
    hps = simplex_hyperplanes(Simplex.of([(0, 0), (1, 0), (0, 1)]))
    assert {(h.normal, h.offset) for h in hps} == {((1, 0), 0), ((0, 1), 0), ((1, 1), 1)}


def test_c_simplex_vertices_and_membership():
    spec = CSimplexSpec((Q(0), Q(0)), DirectionFrame.exact([(1, 0), (0, 1)]), (Q(1, 2), Q(1, 4)))
    assert spec.vertex_points() == [(0, 0), (Q(1, 2), 0), (Q(1, 2), Q(1, 4))]
    assert c_simplex_contains(spec, (Q(1, 4), Q(1, 16)))
    assert not c_simplex_contains(spec, (Q(1, 4), Q(1, 4)))
    C = build_c_simplex(spec)
    rng = random.Random(3)
    for _ in range(200):
        p = (Q(rng.randint(0, 16), 16), Q(rng.randint(0, 16), 16))
        assert c_simplex_contains(spec, p) == contains(C, p)


def test_intersect_c_simplexes_double_containment():
    rng = random.Random(11)
    frame = DirectionFrame.exact([(1, 0, 0), (0, 1, 1), (0, 1, -1)])
    apex = (Q(1, 3), Q(1, 5), Q(1, 7))
    for _ in range(100):
        la = tuple(Q(rng.randint(1, 12), rng.randint(1, 12)) for _ in range(3))
        lb = tuple(Q(rng.randint(1, 12), rng.randint(1, 12)) for _ in range(3))
        a, b = CSimplexSpec(apex, frame, la), CSimplexSpec(apex, frame, lb)
        c = intersect_c_simplexes(a, b)
        sa, sb = build_c_simplex(a), build_c_simplex(b)
        for v in build_c_simplex(c).vertices:
            assert contains(sa, v) and contains(sb, v)


def test_frames_must_be_orthogonal():
    with pytest.raises(FrameError):
        DirectionFrame.exact([(1, 0), (1, 1)])
    with pytest.raises(FrameError):
        DirectionFrame.exact([(0, 0)])
    numeric = DirectionFrame.exact([(2, 0), (0, 3)]).as_numeric()
    assert numeric.vectors == ((1.0, 0.0), (0.0, 1.0))


def _random_weights(rng, k, allow_zero=False):
    while True:
        w = [rng.randint(0 if allow_zero else 1, 6) for _ in range(k)]
        if sum(w):
            return [Q(x, sum(w)) for x in w]


def _combination(s, t):
    return tuple(sum((ti * v[r] for ti, v in zip(t, s.vertices)), Q(0)) for r in range(s.ambient))


def test_barycentric_round_trip():
    rng = random.Random(21)
    for _ in range(300):
        s = _random_simplex_or_none(rng)
        if s is None:
            continue
        t = _random_weights(rng, len(s.vertices), allow_zero=True)
        assert barycentric(s, _combination(s, t)) == tuple(t)


def _random_simplex_or_none(rng):
    try:
        return _random_simplex(rng)
    except DegenerateSimplex:
        return None


def test_relint_only_on_smallest_face():
    rng = random.Random(22)
    checked = 0
    while checked < 200:
        s = _random_simplex_or_none(rng)
        if s is None:
            continue
        p = _combination(s, _random_weights(rng, len(s.vertices), allow_zero=True))
        F = smallest_containing_face(s, p)
        for G in s.faces():
            assert relint_contains(G, p) == (G == F)
        checked += 1


def test_face_meets_relint_iff_contains():
    rng = random.Random(23)
    T = Simplex.of([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    checked = 0
    while checked < 200:
        m = rng.randint(0, 3)
        pts = [_combination(T, _random_weights(rng, 4, allow_zero=True)) for _ in range(m + 1)]
        try:
            S = Simplex.of(pts)
        except DegenerateSimplex:
            continue
        assert relint_contains(S, S.barycenter)
        for F in T.faces():
            assert all(contains(F, v) for v in S.vertices) == contains(F, S.barycenter)
        checked += 1
