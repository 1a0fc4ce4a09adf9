"""
Witnesses of failing strong semisimplicity.

build_witness turns a rationally outgoing certificate into McNaughton functions f, g with
Zf = F and Zg = S; refute_ideal_membership then shows f ≰ m·g on X for m = 1..m_max.
pullback_tangent moves a 1-tangent of η(X) back to a k-tangent of X.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from statistics import median
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.exceptions import NoTangentSimplex, PreconditionError, PullbackError, SpanMembershipError, WitnessError
from ..core.logger import get_logger
from . import linalg
from .closed_sets import ClosedSet, PointSequence, exact
from .complexes import SimplicialComplex, box_contains
from .geometry import (
    CSimplexSpec,
    DirectionFrame,
    Point,
    Simplex,
    barycentric,
    build_c_simplex,
    contains,
    in_unit_cube,
    simplex_in_simplex,
    smallest_face_containing_all,
)
from .linalg import add, dot, scale, sub
from .mcnaughton import (
    McNaughtonFn,
    ZMap,
    leq_scalar_multiple,
    mcnaughton,
    preimage_polyhedron,
    restrict_to_complex,
    zero_set,
)
from .polyhedra import Polyhedron, intersect_polyhedra, polyhedra_equal
from .reports import build_report, check
from .tangents import (
    TangentCertificate,
    _orthonormalize,
    check_rationally_outgoing,
    estimate_levels,
    tangent_simplex_in_simplex,
)
from .triangulation import cube_triangulation, subdivide_with_subpolyhedron

log = get_logger("witness")


@dataclass(frozen=True, eq=False)
class WitnessPair:
    f: McNaughtonFn
    g: McNaughtonFn
    carrier: SimplicialComplex
    cert: TangentCertificate | None = None


def build_witness(cert: TangentCertificate, n: int) -> WitnessPair:
    """f = 0 on the vertices in F and 1 elsewhere, g likewise for S, over a regular Δ of [0,1]^n."""
    S, F = cert.S, cert.F
    if cert.ambient != n:
        raise WitnessError(f"certificate lives in R^{cert.ambient}, not R^{n}")
    if not all(in_unit_cube(v) for v in S.vertices):
        raise WitnessError("certificate geometry outside the cube")
    if not F.is_face_of(S):
        raise WitnessError("F is not a face of S")
    if F == S:
        raise WitnessError("F = S: the face must be proper")
    C = build_c_simplex(cert.c_spec)
    if not simplex_in_simplex(C, S) or simplex_in_simplex(C, F):
        raise WitnessError("certificate fails C ⊆ S or C ⊄ F")
    delta = subdivide_with_subpolyhedron(cube_triangulation(n), Polyhedron.of([S]))
    delta = subdivide_with_subpolyhedron(delta, Polyhedron.of([F]))
    f = mcnaughton(delta, {v: Fraction(0) if contains(F, v) else Fraction(1) for v in delta.vertices})
    g = mcnaughton(delta, {v: Fraction(0) if contains(S, v) else Fraction(1) for v in delta.vertices})
    if not polyhedra_equal(zero_set(f), Polyhedron.of([F])):
        raise WitnessError("Zf differs from F")
    if not polyhedra_equal(zero_set(g), Polyhedron.of([S])):
        raise WitnessError("Zg differs from S")
    log.info("witness pair over %d cells in dimension %d", len(delta), n)
    return WitnessPair(f, g, delta, cert)


def crux_report(pair: WitnessPair, X: ClosedSet) -> Dict:
    """X ∩ Zf = X ∩ F = X ∩ S = X ∩ Zg."""
    f, g = pair.f, pair.g
    poly = X.polyhedral_part if X.polyhedral_part is not None and not X.polyhedral_part.is_empty else None
    zf, zg = zero_set(f), zero_set(g)
    pts = list(X.iter_points())
    checks = []

    def same(a: Polyhedron, b: Polyhedron, in_a, in_b) -> Tuple[bool, str]:
        if poly is not None and not polyhedra_equal(intersect_polyhedra(a, poly), intersect_polyhedra(b, poly)):
            return False, "polyhedral parts differ"
        bad = next((p for p in pts if in_a(p) != in_b(p)), None)
        if bad is not None:
            return False, f"differs at {tuple(map(linalg.fraction_str, bad))}"
        return True, ""

    ok, d = same(zf, zg, lambda p: f.value(p) == 0, lambda p: g.value(p) == 0)
    checks.append(check("zf-zg", "X ∩ Zf = X ∩ Zg", ok, d, anchor="crux"))
    if pair.cert is not None:
        S, F = pair.cert.S, pair.cert.F
        ok, d = same(Polyhedron.of([F]), zf, lambda p: contains(F, p), lambda p: f.value(p) == 0)
        checks.append(check("f-zf", "X ∩ F = X ∩ Zf", ok, d, anchor="crux"))
        ok, d = same(Polyhedron.of([S]), Polyhedron.of([F]), lambda p: contains(S, p), lambda p: contains(F, p))
        checks.append(check("s-f", "X ∩ S = X ∩ F", ok, d, anchor="crux"))
        ok, d = same(Polyhedron.of([S]), zg, lambda p: contains(S, p), lambda p: g.value(p) == 0)
        checks.append(check("s-zg", "X ∩ S = X ∩ Zg", ok, d, anchor="crux"))
    return build_report(checks)


def verify_crux(pair: WitnessPair, X: ClosedSet) -> bool:
    return crux_report(pair, X)["ok"]


def refute_ideal_membership(pair: WitnessPair, X: ClosedSet, m_max: int | None = None) -> Dict:
    """Runs f ≤ m·g on X for m = 1..m_max; refuted when every m has a violating point."""
    m_max = settings.m_max_default if m_max is None else m_max
    if m_max < 1:
        raise PreconditionError("m_max must be positive")
    refutations = []
    first_pass = None
    for m in range(1, m_max + 1):
        res = leq_scalar_multiple(pair.f, pair.g, m, X)
        if res.holds:
            first_pass = m
            log.info("f ≤ %d·g holds on X; membership not refuted", m)
            break
        refutations.append({"m": m, "witness": [linalg.fraction_str(c) for c in res.witness], "source": res.source})
    refuted = first_pass is None
    checks = [check(
        "refuted", f"f ≰ m·g on X for every m ≤ {m_max}", refuted,
        "" if refuted else f"f ≤ {first_pass}·g holds on X",
        anchor="principal ideal",
    )]
    return build_report(checks, m_max=m_max, refutations=refutations, refuted_up_to=len(refutations))


# ---------- Pullback ----------

@dataclass(frozen=True)
class PullbackResult:
    z: Point
    frame: DirectionFrame
    A: Tuple[Tuple[int, ...], ...]
    b: Tuple[int, ...]
    c: float
    lengths: Tuple[Fraction, ...] | None
    cert: TangentCertificate | None
    cell: Simplex
    diagnostics: Dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.frame.k


def _rationalize(v: Sequence[float], max_den: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(float(c)).limit_denominator(max_den) for c in v)


def _exact_gram_schmidt(vectors: Sequence[Sequence[Fraction]]) -> List[Tuple[Fraction, ...]]:
    out: List[Tuple[Fraction, ...]] = []
    for v in vectors:
        w = tuple(v)
        for q in out:
            w = sub(w, scale(dot(w, q) / dot(q, q), q))
        if all(c == 0 for c in w):
            raise PullbackError("rationalized frame is linearly dependent")
        out.append(w)
    return out


def _check_segment(eta: ZMap, X: ClosedSet, x: Point, seg: Simplex) -> None:
    """conv(x, x+εu) ∩ η(X) = {x}."""
    for p in X.iter_points():
        y = eta.evaluate(p)
        if y != x and contains(seg, y):
            raise PullbackError(f"η({tuple(map(linalg.fraction_str, p))}) lies on the segment away from x")
    poly = X.polyhedral_part
    if poly is not None and not poly.is_empty:
        on_seg = intersect_polyhedra(poly, preimage_polyhedron(eta, Polyhedron.of([seg])))
        over_x = preimage_polyhedron(eta, Polyhedron.of([Simplex((x,))]))
        if not on_seg.is_empty and not polyhedra_equal(on_seg, intersect_polyhedra(on_seg, over_x)):
            raise PullbackError("the polyhedral part of X maps onto the segment away from x")


def pullback_tangent(
    eta: ZMap,
    X: ClosedSet,
    seq: PointSequence,
    u: Sequence[float],
    epsilon,
    x: Sequence,
) -> PullbackResult:
    """A k-tangent of X at z = lim seq whose image under η is the 1-tangent u of η(X) at x."""
    epsilon = linalg.to_fraction(epsilon, name="epsilon")
    x = exact(x)
    if eta.codomain != 2 or len(x) != 2 or len(u) != 2:
        raise PullbackError("the pullback starts from a 1-tangent in the plane")
    if epsilon <= 0:
        raise PullbackError("epsilon must be positive")
    if eta.is_constant():
        raise PullbackError("η is constant: η(X) is a single point without tangents")
    n = eta.ambient
    z = seq.limit
    if eta.evaluate(z) != x:
        raise PullbackError("the preimage sequence does not converge into η^{-1}(x)")
    max_den = settings.rationalize_denominator
    u_rat = _rationalize(u, max_den)
    if all(c == 0 for c in u_rat):
        raise PullbackError("u is zero")
    seg = Simplex((x, add(x, scale(epsilon, u_rat))))
    _check_segment(eta, X, x, seg)

    # Step 1: make η^{-1}(x) and η^{-1}(segment) unions of cells, then pick the busiest cell
    over_x = preimage_polyhedron(eta, Polyhedron.of([Simplex((x,))]))
    over_seg = preimage_polyhedron(eta, Polyhedron.of([seg]))
    delta = subdivide_with_subpolyhedron(eta.carrier, over_x)
    delta = subdivide_with_subpolyhedron(delta, over_seg)
    eta = restrict_to_complex(eta, delta)
    pts = seq.exact_points
    tail = pts[seq.tail_start(settings.tail_fraction):]
    counts = {}
    for cell in delta.maximal:
        if contains(cell, z):
            counts[cell] = sum(1 for p in tail if box_contains(cell.bbox, p) and barycentric(cell, p) is not None)
    if not counts or max(counts.values()) == 0:
        raise PullbackError("no carrier cell captures the tail of the sequence")
    T = min(counts, key=lambda c: (-counts[c], c.vertices))
    piece = eta.piece(T)
    A = np.array(piece.matrix, dtype=float)
    idx = [i for i, p in enumerate(pts) if box_contains(T.bbox, p) and barycentric(T, p) is not None]
    if len(idx) < 4:
        raise PullbackError(f"only {len(idx)} sequence points lie in the selected cell")
    sub_pts = np.array([[float(c) for c in pts[i]] for i in idx])
    z_arr = np.array([float(c) for c in z])
    tail_start = len(idx) - max(2, int(np.ceil(len(idx) * settings.tail_fraction)))
    log.info("pullback: cell %s holds %d of %d tail points", T, counts[T], len(tail))

    # Step 2: residual levels until A·w_k leaves zero
    zero_tol = 1e-7
    try:
        frame, _, deviations = estimate_levels(
            sub_pts, z_arr, n, tail_start, stop=lambda level, w: np.linalg.norm(A @ w) > zero_tol
        )
    except SpanMembershipError as e:
        raise PullbackError(f"residuals degenerate at level {e.level}: {e}") from e
    if np.linalg.norm(A @ frame[-1]) <= zero_tol:
        raise PullbackError(f"A·w stays zero through all {n} levels: inconsistent input")
    frame = _orthonormalize(frame)
    k = len(frame)

    # Step 3: c = lim ‖η(z_i) − η(z)‖ / ‖residual_k‖
    resid = sub_pts[tail_start:] - z_arr
    for w in frame[:-1]:
        resid = resid - np.outer(resid @ w, w)
    img = np.array([[float(c) for c in eta.evaluate(pts[i])] for i in idx[tail_start:]]) - np.array([float(c) for c in x])
    c_num = float(median(np.linalg.norm(img, axis=1) / np.linalg.norm(resid, axis=1)))
    nframe = DirectionFrame(n, tuple(tuple(float(v) for v in w) for w in frame), "numeric", settings.frame_tol)
    diagnostics = {
        "k": k,
        "A_w_norms": [float(np.linalg.norm(A @ w)) for w in frame],
        "tail_deviations": deviations,
        "c": c_num,
    }

    result = dict(z=z, frame=nframe, A=piece.matrix, b=piece.offset, c=c_num, cell=T)
    try:
        cert, lengths = _certify(eta, X, T, z, frame, u_rat, epsilon, x, max_den, diagnostics)
    except (PullbackError, NoTangentSimplex) as e:
        log.warning("pullback without certificate: %s", e)
        diagnostics["certificate_error"] = str(e)
        return PullbackResult(lengths=None, cert=None, diagnostics=diagnostics, **result)
    return PullbackResult(lengths=lengths, cert=cert, diagnostics=diagnostics, **result)


def _certify(eta, X, T, z, frame, u_rat, epsilon, x, max_den, diagnostics):
    piece = eta.piece(T)
    k = len(frame)
    exact_frame = _exact_gram_schmidt([_rationalize(w, max_den) for w in frame])
    zero = tuple(Fraction(0) for _ in x)
    linear = lambda w: tuple(linalg.dot(row, w) for row in piece.matrix)
    for j, w in enumerate(exact_frame[:-1], start=1):
        if linear(w) != zero:
            raise PullbackError(f"A·w_{j} ≠ 0 for the rationalized frame")
    aw = linear(exact_frame[-1])
    c_exact = dot(aw, u_rat) / dot(u_rat, u_rat)
    if c_exact <= 0 or aw != scale(c_exact, u_rat):
        raise PullbackError("A·w_k is not a positive multiple of u for the rationalized frame")
    wf = DirectionFrame(len(z), tuple(exact_frame), "exact")
    gamma = tangent_simplex_in_simplex(T, z, wf)
    lengths = gamma[:-1] + (min(gamma[-1], epsilon / c_exact),)
    spec = CSimplexSpec(z, wf, lengths)
    C = build_c_simplex(spec)
    seg = Simplex((x, add(x, scale(epsilon, u_rat))))
    eta_s = all(contains(seg, piece(v)) for v in C.vertices)
    diagnostics["c_exact"] = linalg.fraction_str(c_exact)
    diagnostics["image_on_segment"] = eta_s
    if not eta_s:
        raise PullbackError("η(C_{z,w,λ}) leaves the segment")
    S = smallest_face_containing_all(T, C.vertices)
    F_verts = [v for v in S.vertices if piece(v) == x]
    if not F_verts:
        raise PullbackError("no vertex of S maps to x")
    cert = TangentCertificate(z, wf, lengths, S, Simplex.trusted(F_verts))
    report = check_rationally_outgoing(cert, X)
    diagnostics["certificate_checks"] = report["checks"]
    if not report["ok"]:
        raise PullbackError("derived certificate fails: " + "; ".join(report["issues"]))
    log.info("pullback certificate: k=%d, S=%s, F=%s", k, S, cert.F)
    return cert, lengths
