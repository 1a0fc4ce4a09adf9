from fractions import Fraction as Q

import numpy as np
import pytest

from mvtangent.core.exceptions import NoTangentSimplex, PreconditionError, SpanMembershipError
from mvtangent.services.closed_sets import PointSequence, SequenceFormula
from mvtangent.services.geometry import CSimplexSpec, DirectionFrame, Simplex, build_c_simplex, simplex_in_simplex
from mvtangent.services.polyhedra import Polyhedron
from mvtangent.services.tangents import (
    TangentCertificate,
    certificate_from_planar,
    check_planar_criterion,
    check_rationally_outgoing,
    detect_k_tangent,
    face_containment_holds,
    residual_direction,
    tangent_simplex_in_polyhedron,
    tangent_simplex_in_simplex,
)

TRIANGLE = Simplex.of([(0, 0), (1, 0), (0, 1)])
TETRA = Simplex.of([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])


def _curve(*powers, stop=10001):
    return PointSequence.from_formula(SequenceFormula(tuple(((Q(1), p),) for p in powers), 2, stop))


def test_cusp_tangent_direction():
    est = detect_k_tangent(_curve(1, 2), 1)
    assert est.ok
    assert np.allclose(est.frame.vectors[0], (1.0, 0.0), atol=1e-6)


def test_degree_two_frame():
    est = detect_k_tangent(_curve(2, 4, 1), 2)
    assert est.k == 2
    assert np.allclose(est.frame.vectors[0], (0.0, 0.0, 1.0), atol=1e-5)
    assert np.allclose(est.frame.vectors[1], (1.0, 0.0, 0.0), atol=1e-5)


def test_subsequence_gives_same_tangent():
    seq = _curve(1, 2)
    full = detect_k_tangent(seq, 1).frame.vectors[0]
    half = detect_k_tangent(seq.subsequence(2), 1).frame.vectors[0]
    assert np.allclose(full, half, atol=2e-6)


def test_residual_in_span_is_rejected():
    with pytest.raises(SpanMembershipError):
        residual_direction((0, 0), (1, 0), [(1.0, 0.0)])
    r = residual_direction((0, 0), (3, 4))
    assert np.allclose(r, (0.6, 0.8))


def test_sequence_preconditions():
    with pytest.raises(PreconditionError):
        detect_k_tangent(_curve(1, 2, stop=4), 1)
    with pytest.raises(PreconditionError):
        PointSequence(((Q(1), Q(1)), (Q(0), Q(0))), (Q(0), Q(0)))
    with pytest.raises(PreconditionError):
        detect_k_tangent(_curve(1, 2), 3)


def test_tangent_simplex_in_triangle():
    frame = DirectionFrame.exact([(1, 0), (0, 1)])
    assert tangent_simplex_in_simplex(TRIANGLE, (0, 0), frame) == (Q(1, 2), Q(1, 4))
    with pytest.raises(NoTangentSimplex) as err:
        tangent_simplex_in_simplex(TRIANGLE, (0, 0), DirectionFrame.exact([(-1, 0)]))
    assert err.value.level == 1


def test_tangent_simplex_in_tetrahedron():
    frame = DirectionFrame.exact([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    P = Polyhedron.of([TETRA])
    spec = tangent_simplex_in_polyhedron(P, (0, 0, 0), frame)
    assert spec.lengths == (Q(1, 2), Q(1, 4), Q(1, 8))
    assert simplex_in_simplex(build_c_simplex(spec), TETRA)
    assert face_containment_holds(TETRA, spec)


def test_tangent_simplex_picks_a_working_generator():
    far = Simplex.of([(Q(1, 2), Q(1, 2)), (1, 1)])
    P = Polyhedron.of([far, TRIANGLE])
    spec = tangent_simplex_in_polyhedron(P, (0, 0), DirectionFrame.exact([(1, 1)]))
    assert simplex_in_simplex(build_c_simplex(spec), TRIANGLE)
    assert face_containment_holds(TRIANGLE, spec)
    with pytest.raises(NoTangentSimplex) as err:
        tangent_simplex_in_polyhedron(Polyhedron.of([far]), (0, 0), DirectionFrame.exact([(1, 1)]))
    assert err.value.level == 0


def test_cusp_certificate_passes(cusp, cusp_cert):
    seq = cusp.samples[0]
    report = check_rationally_outgoing(cusp_cert, cusp, seq)
    assert report["ok"], report["issues"]
    assert [c["id"] for c in report["checks"]] == ["a", "b", "c", "d", "e"]
    assert all(c["ok"] for c in report["checks"])


def test_on_segment_sample_breaks_condition_d(cusp, cusp_cert):
    report = check_rationally_outgoing(cusp_cert, cusp.with_points((Q(1, 4), Q(0))))
    assert not report["ok"]
    failed = [c["id"] for c in report["checks"] if not c["ok"]]
    assert failed == ["d"]


def test_face_equal_to_simplex_fails(cusp, cusp_cert):
    cert = TangentCertificate(cusp_cert.x, cusp_cert.frame, cusp_cert.lengths, cusp_cert.S, cusp_cert.S)
    report = check_rationally_outgoing(cert, cusp)
    assert not report["ok"]
    assert "c" in [c["id"] for c in report["checks"] if not c["ok"]]


def test_planar_criterion(cusp, cusp_cert):
    report = check_planar_criterion(cusp, (0, 0), (1, 0), Q(1, 2))
    assert report["ok"]
    cert = certificate_from_planar((0, 0), (1, 0), Q(1, 2))
    assert cert.S == cusp_cert.S and cert.F == cusp_cert.F
    assert cert.lengths == cusp_cert.lengths
    crowded = cusp.with_points((Q(1, 4), Q(0)))
    assert not check_planar_criterion(crowded, (0, 0), (1, 0), Q(1, 2))["ok"]


def test_c_spec_of_certificate(cusp_cert):
    spec = cusp_cert.c_spec
    assert isinstance(spec, CSimplexSpec)
    assert build_c_simplex(spec) == cusp_cert.S


def test_extra_points_keep_a_failure_failing(cusp, cusp_cert):
    crowded = cusp.with_points((Q(1, 4), Q(0)))
    assert not check_rationally_outgoing(cusp_cert, crowded)["ok"]
    assert not check_rationally_outgoing(cusp_cert, crowded.with_points((Q(3, 4), Q(1, 2))))["ok"]
    assert check_rationally_outgoing(cusp_cert, cusp.with_points((Q(1, 2), Q(1, 2))))["ok"]


def test_detected_frame_is_orthonormal():
    V = np.array(detect_k_tangent(_curve(2, 4, 1), 2).frame.vectors)
    assert np.allclose(V @ V.T, np.eye(2), atol=1e-9)


def test_frame_prefix_does_not_depend_on_k():
    seq = _curve(2, 4, 1)
    one = detect_k_tangent(seq, 1).frame.vectors[0]
    two = detect_k_tangent(seq, 2).frame.vectors[0]
    assert np.allclose(one, two, atol=1e-12)
