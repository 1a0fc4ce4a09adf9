from fractions import Fraction as Q

import numpy as np
import pytest

from mvtangent.core.exceptions import PullbackError, WitnessError
from mvtangent.services import schemas
from mvtangent.services.geometry import Simplex
from mvtangent.services.mcnaughton import mcnaughton, pair_map, zero_set
from mvtangent.services.polyhedra import Polyhedron, polyhedra_equal
from mvtangent.services.tangents import TangentCertificate, check_rationally_outgoing
from mvtangent.services.triangulation import cube_triangulation
from mvtangent.services.witness import (
    build_witness,
    crux_report,
    pullback_tangent,
    refute_ideal_membership,
    verify_crux,
)


@pytest.fixture(scope="module")
def cusp_pair(cusp_cert):
    return build_witness(cusp_cert, 2)


def test_zero_sets_match_certificate(cusp_pair, cusp_cert):
    assert polyhedra_equal(zero_set(cusp_pair.f), Polyhedron.of([cusp_cert.F]))
    assert polyhedra_equal(zero_set(cusp_pair.g), Polyhedron.of([cusp_cert.S]))


def test_crux_on_cusp(cusp_pair, cusp):
    report = crux_report(cusp_pair, cusp)
    assert report["ok"], report["issues"]
    assert verify_crux(cusp_pair, cusp)


def test_refutes_every_multiple(cusp_pair, cusp):
    report = refute_ideal_membership(cusp_pair, cusp, 64)
    assert report["ok"]
    assert report["refuted_up_to"] == 64
    assert [r["m"] for r in report["refutations"]] == list(range(1, 65))
    for r in report["refutations"]:
        p = tuple(Q(c) for c in r["witness"])
        assert cusp_pair.f.value(p) > r["m"] * cusp_pair.g.value(p)


def test_on_segment_sample_breaks_crux(cusp_pair, cusp):
    crowded = cusp.with_points((Q(1, 4), Q(0)))
    assert not verify_crux(cusp_pair, crowded)


def test_face_must_be_proper(cusp_cert):
    cert = TangentCertificate(cusp_cert.x, cusp_cert.frame, cusp_cert.lengths, cusp_cert.S, cusp_cert.S)
    with pytest.raises(WitnessError):
        build_witness(cert, 2)
    not_a_face = Simplex.of([(Q(1, 4), 0)])
    cert = TangentCertificate(cusp_cert.x, cusp_cert.frame, cusp_cert.lengths, cusp_cert.S, not_a_face)
    with pytest.raises(WitnessError):
        build_witness(cert, 2)


def test_pullback_through_projection(fixtures_dir):
    m = schemas.load(schemas.PullbackInputModel, fixtures_dir / "projection.json")
    eta = schemas.zmap_from(m.eta)
    X = schemas.closed_set_from(m.X)
    res = pullback_tangent(eta, X, schemas.sequence_from(m.sequence), m.u, m.epsilon, schemas.point_from(m.x))
    assert res.k == 2
    assert np.allclose(res.frame.vectors[0], (0.0, 0.0, 1.0), atol=1e-6)
    assert np.allclose(res.frame.vectors[1], (1.0, 0.0, 0.0), atol=1e-6)
    norms = res.diagnostics["A_w_norms"]
    assert norms[0] < 1e-9 and norms[1] > 1e-6
    assert res.diagnostics["image_on_segment"]
    assert res.cert is not None
    assert check_rationally_outgoing(res.cert, X)["ok"]

    pair = build_witness(res.cert, 3)
    report = refute_ideal_membership(pair, X, 64)
    assert report["ok"] and report["refuted_up_to"] == 64


def _coordinates(K):
    return [mcnaughton(K, {v: v[i] for v in K.vertices}) for i in range(K.ambient)]


def test_pullback_through_identity(cusp):
    eta = pair_map(*_coordinates(cube_triangulation(2)))
    res = pullback_tangent(eta, cusp, cusp.samples[0], (1.0, 0.0), Q(1, 2), (0, 0))
    assert res.k == 1
    assert np.allclose(res.frame.vectors[0], (1.0, 0.0), atol=1e-6)
    assert res.cert is not None
    assert res.cert.F == Simplex.of([(0, 0)])
    assert all(v[1] == 0 for v in res.cert.S.vertices)
    assert check_rationally_outgoing(res.cert, cusp)["ok"]


def test_pullback_rejects_constant_map(cusp):
    K = cube_triangulation(2)
    zero = mcnaughton(K, {v: 0 for v in K.vertices})
    with pytest.raises(PullbackError, match="constant"):
        pullback_tangent(pair_map(zero, zero), cusp, cusp.samples[0], (1.0, 0.0), Q(1, 2), (0, 0))


def test_refutation_witness_beats_smaller_multiples(cusp_pair, cusp):
    report = refute_ideal_membership(cusp_pair, cusp, 16)
    for r in report["refutations"]:
        p = tuple(Q(c) for c in r["witness"])
        assert cusp_pair.g.value(p) >= 0
        assert all(cusp_pair.f.value(p) > m * cusp_pair.g.value(p) for m in range(1, r["m"] + 1))
