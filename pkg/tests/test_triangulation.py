import random
import time
from fractions import Fraction as Q

import pytest

from mvtangent.core.exceptions import BlowupBudgetExceeded, DegenerateSimplex, NotAComplex, NotContained
from mvtangent.services.complexes import ComplexBuilder, SimplicialComplex
from mvtangent.services.geometry import Simplex, contains, is_regular
from mvtangent.services.polyhedra import (
    Polyhedron,
    intersect_polyhedra,
    polyhedra_equal,
    polyhedron_contains_point,
    polyhedron_subset,
    simplex_in_polyhedron,
)
from mvtangent.services.triangulation import (
    common_refinement,
    cells_inside,
    cube_triangulation,
    farey_point,
    is_subdivision,
    regularize,
    same_support,
    refine_linear_on,
    stellar_blowup,
    subdivide_with_subpolyhedron,
    union_property_holds,
    validate_complex,
)

BAD = Simplex.of([(0, 0), (1, 0), (1, 2)])


def test_validate_rejects_overlap():
    a = Simplex.of([(0, 0), (1, 0), (0, 1)])
    b = Simplex.of([(0, 0), (1, 0), (1, 1)])
    with pytest.raises(NotAComplex) as err:
        validate_complex([a, b])
    assert set(err.value.pair) == {a, b}


def test_validate_accepts_shared_edge():
    K = validate_complex([Simplex.of([(0, 0), (1, 0), (1, 1)]), Simplex.of([(0, 0), (0, 1), (1, 1)])])
    assert len(K) == 2
    assert len(K.vertices) == 4
    # faces listed among the cells are dropped
    K2 = validate_complex(list(K.maximal) + [Simplex.of([(0, 0), (1, 1)])])
    assert K2.maximal == K.maximal


def test_cube_triangulation_is_regular():
    for n in (1, 2, 3):
        K = cube_triangulation(n)
        assert len(K) == [1, 2, 6][n - 1]
        assert all(is_regular(s) for s in K.maximal)
        validate_complex(K.maximal)


def test_farey_point_inside_bad_simplex():
    p = farey_point(BAD)
    assert p is not None
    assert contains(BAD, p)
    assert p not in BAD.vertices
    assert farey_point(Simplex.of([(0, 0), (1, 0), (1, 1)])) is None


def test_regularize_bad_simplex():
    K = SimplicialComplex.of([BAD])
    R = regularize(K)
    assert len(R) > 1
    assert all(is_regular(s) for s in R.maximal)
    assert is_subdivision(R, K)
    assert set(K.vertices) <= set(R.vertices)
    validate_complex(R.maximal)
    assert regularize(K).maximal == R.maximal


def test_regularize_leaves_regular_complex_alone():
    K = cube_triangulation(2)
    assert regularize(K).maximal == K.maximal


def test_blowup_budget():
    builder = ComplexBuilder([BAD], budget=0)
    with pytest.raises(BlowupBudgetExceeded):
        builder.blowup_at((Q(2, 3), Q(2, 3)))


def test_stellar_blowup_counts():
    tri = SimplicialComplex.of([Simplex.of([(0, 0), (1, 0), (0, 1)])])
    assert len(stellar_blowup(tri, (Q(1, 3), Q(1, 3)))) == 3
    assert len(stellar_blowup(cube_triangulation(2), (Q(1, 2), Q(1, 2)))) == 4


def test_subdivide_with_segment():
    K = cube_triangulation(2)
    Qs = Polyhedron.of([Simplex.of([(0, 0), (Q(1, 2), 0)])])
    D = subdivide_with_subpolyhedron(K, Qs)
    assert union_property_holds(D, Qs)
    assert all(is_regular(s) for s in D.maximal)
    assert is_subdivision(D, K)
    assert Simplex.of([(0, 0), (Q(1, 2), 0)]) in D.cells


def test_subdivide_rejects_outside_polyhedron():
    with pytest.raises(NotContained):
        subdivide_with_subpolyhedron(cube_triangulation(2), Polyhedron.of([Simplex.of([(0, 0), (2, 0)])]))


TRIANGULATION_BUDGET_SECONDS = 60


def _random_simplex(rng, n, max_den):
    while True:
        pts = [tuple(Q(rng.randint(0, d), d) for d in (rng.randint(1, max_den) for _ in range(n))) for _ in range(n + 1)]
        try:
            return Simplex.of(pts)
        except DegenerateSimplex:
            continue


def _check_output(D, K):
    validate_complex(D.maximal)
    assert is_subdivision(D, K)
    assert all(is_regular(s) for s in D.maximal)


def test_random_regularize_and_subdivide():
    rng = random.Random(5)
    start = time.time()
    for i in range(100):
        n = 1 + i % 2
        if i < 50:
            K = SimplicialComplex.of([_random_simplex(rng, n, 5)])
            _check_output(regularize(K), K)
        else:
            K = cube_triangulation(n)
            Qp = Polyhedron.of([_random_simplex(rng, n, 3 if n == 2 else 6)])
            D = subdivide_with_subpolyhedron(K, Qp)
            _check_output(D, K)
            assert union_property_holds(D, Qp)
    assert time.time() - start < TRIANGULATION_BUDGET_SECONDS


def test_common_refinement_cells_inside_both():
    K = cube_triangulation(2)
    L = validate_complex([Simplex.of([(0, 0), (1, 0), (0, 1)]), Simplex.of([(1, 0), (0, 1), (1, 1)])])
    R = common_refinement(K, L)
    assert cells_inside(R, K) and cells_inside(R, L)
    assert same_support(R, K)


def test_refine_linear_on_single_segment(tall_hat):
    K = validate_complex([Simplex.of([(0,), (1,)])])
    fine = refine_linear_on(K, tall_hat)
    assert is_subdivision(fine, K)
    assert cells_inside(fine, tall_hat.carrier)
    assert all(is_regular(s) for s in fine.maximal)


def test_polyhedron_contains_point():
    P = Polyhedron.of([Simplex.of([(0, 0), (1, 0), (0, 1)]), Simplex.of([(2, 2), (3, 3)])])
    assert polyhedron_contains_point(P, (Q(1, 3), Q(1, 3)))
    assert polyhedron_contains_point(P, (Q(5, 2), Q(5, 2)))
    assert not polyhedron_contains_point(P, (1, 1))
    assert not polyhedron_contains_point(P, (Q(5, 2), 2))


def test_polyhedron_set_algebra():
    square = Polyhedron.of([Simplex.of([(0, 0), (1, 0), (1, 1)]), Simplex.of([(0, 0), (0, 1), (1, 1)])])
    assert simplex_in_polyhedron(Simplex.of([(0, 0), (1, 0), (0, 1)]), square)
    assert not simplex_in_polyhedron(Simplex.of([(0, 0), (2, 0), (0, 1)]), square)

    diagonal = Polyhedron.of([Simplex.of([(0, 0), (2, 2)])])
    cut = intersect_polyhedra(square, diagonal)
    assert polyhedra_equal(cut, Polyhedron.of([Simplex.of([(0, 0), (1, 1)])]))
    assert polyhedron_subset(cut, square)
    assert not polyhedron_subset(diagonal, square)


def test_blowup_of_bad_simplex_at_edge_midpoint():
    R = stellar_blowup(SimplicialComplex.of([BAD]), (1, 1))
    assert R.maximal == (
        Simplex.of([(0, 0), (1, 0), (1, 1)]),
        Simplex.of([(0, 0), (1, 1), (1, 2)]),
    )
    assert all(is_regular(s) for s in R.maximal)
    assert farey_point(BAD) == (1, 1)


def test_blowup_adds_one_vertex():
    rng = random.Random(6)
    K = cube_triangulation(2)
    for _ in range(20):
        p = (Q(rng.randint(0, 6), 6), Q(rng.randint(0, 6), 6))
        B = stellar_blowup(K, p)
        assert len(B.vertices) == len(K.vertices) + (0 if p in K.vertices else 1)
        assert is_subdivision(B, K)
        K = B
    assert stellar_blowup(K, (0, 0)).maximal == K.maximal


def test_regular_segment_is_left_alone():
    seg = Simplex.of([(Q(1, 3), 0), (0, Q(1, 2))])
    K = SimplicialComplex.of([seg])
    assert regularize(K).maximal == (seg,)


def test_coarser_complex_is_not_a_subdivision(unit_interval):
    whole = validate_complex([Simplex.of([(0,), (1,)])])
    assert not is_subdivision(whole, unit_interval)
    assert is_subdivision(unit_interval, whole)
