"""
Bouligand–Severi k-tangents.

* numeric detection of the frame u_1, …, u_k from a sampled sequence (iterated projection residuals)
* exact construction of an (x,u)-simplex inside a polyhedron
* the rationally-outgoing certificate check
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.exceptions import (
    CertificateError,
    DimensionMismatch,
    MVTangentError,
    NoTangentSimplex,
    PreconditionError,
    SpanMembershipError,
)
from ..core.logger import get_logger
from . import linalg
from .closed_sets import ClosedSet, PointSequence, exact
from .geometry import (
    CSimplexSpec,
    DirectionFrame,
    Point,
    Simplex,
    affine_coordinates,
    barycentric,
    build_c_simplex,
    contains,
    simplex_in_simplex,
)
from .linalg import add, scale
from .polyhedra import Polyhedron, intersect_polyhedra, polyhedra_equal
from .reports import build_report, check

log = get_logger("tangents")

MIN_POINTS = 4


# ---------- Numeric detection ----------

def _as_array(v: Sequence) -> np.ndarray:
    return np.array([float(c) for c in v], dtype=float)


def _prefix_vectors(frame_prefix) -> List[np.ndarray]:
    if frame_prefix is None:
        return []
    if isinstance(frame_prefix, DirectionFrame):
        return [np.array(u) for u in frame_prefix.unit_vectors()]
    return [np.asarray(u, dtype=float) / np.linalg.norm(u) for u in frame_prefix]


def residual_direction(x: Sequence, x_i: Sequence, frame_prefix=None) -> np.ndarray:
    """(x_i − x − p(x_i − x)) / ‖…‖ with p the orthogonal projection onto span(frame_prefix)."""
    if len(x) != len(x_i):
        raise DimensionMismatch("point and limit have different dimensions")
    r = _as_array(x_i) - _as_array(x)
    for u in _prefix_vectors(frame_prefix):
        r = r - np.dot(r, u) * u
    nrm = float(np.linalg.norm(r))
    if nrm < settings.residual_floor:
        raise SpanMembershipError(f"x_i − x lies in the span of the frame prefix (residual {nrm:.3e})")
    return r / nrm


def _residuals(points: np.ndarray, x: np.ndarray, prefix: Sequence[np.ndarray], level: int) -> Tuple[np.ndarray, np.ndarray]:
    r = points - x
    for u in prefix:
        r = r - np.outer(r @ u, u)
    norms = np.linalg.norm(r, axis=1)
    bad = np.flatnonzero(norms < settings.residual_floor)
    if bad.size:
        i = int(bad[0])
        raise SpanMembershipError(
            f"x_{i} − x lies in the span of the first {level - 1} frame vectors", index=i, level=level
        )
    return r, norms


def _fit_level(dirs: np.ndarray, rho: np.ndarray) -> Tuple[np.ndarray, float]:
    """Extrapolate tail directions to zero residual: dir ≈ u + c·rho, least squares per coordinate."""
    design = np.column_stack([np.ones_like(rho), rho])
    coef, *_ = np.linalg.lstsq(design, dirs, rcond=None)
    fitted = design @ coef
    deviation = float(np.max(np.abs(dirs - fitted))) if len(rho) > 2 else 0.0
    u = coef[0]
    return u / np.linalg.norm(u), deviation


@dataclass(frozen=True)
class TangentEstimate:
    frame: DirectionFrame
    residual_history: Tuple[Tuple[float, ...], ...]
    deviations: Tuple[float, ...]
    converged: Tuple[bool, ...]
    tol: float

    @property
    def ok(self) -> bool:
        return all(self.converged)

    @property
    def k(self) -> int:
        return self.frame.k

    def diagnostics(self) -> List[Dict]:
        return [
            {
                "level": l + 1,
                "converged": self.converged[l],
                "tail_deviation": self.deviations[l],
                "last_residual": self.residual_history[l][-1],
            }
            for l in range(self.k)
        ]


def estimate_levels(
    points: np.ndarray, x: np.ndarray, k: int, tail_start: int, stop=None
) -> Tuple[List[np.ndarray], List[Tuple[float, ...]], List[float]]:
    """
    Frame estimation level by level. `stop(level, u)` may end the scan early (returns True to stop).
    """
    frame: List[np.ndarray] = []
    history: List[Tuple[float, ...]] = []
    deviations: List[float] = []
    for level in range(1, k + 1):
        r, norms = _residuals(points, x, frame, level)
        dirs = r[tail_start:] / norms[tail_start:, None]
        u, dev = _fit_level(dirs, norms[tail_start:])
        for w in frame:
            u = u - np.dot(u, w) * w
        u = u / np.linalg.norm(u)
        frame.append(u)
        history.append(tuple(float(v) for v in norms[tail_start:]))
        deviations.append(dev)
        if stop is not None and stop(level, u):
            break
    return frame, history, deviations


def _orthonormalize(vectors: List[np.ndarray]) -> List[np.ndarray]:
    q, _ = np.linalg.qr(np.column_stack(vectors))
    out = []
    for j, v in enumerate(vectors):
        col = q[:, j]
        out.append(col if np.dot(col, v) >= 0 else -col)
    return out


def detect_k_tangent(seq: PointSequence, k: int, tol: float | None = None) -> TangentEstimate:
    """Numeric estimate of the k-tangent determined by seq; non-converging levels are reported, not raised."""
    tol = settings.numeric_tol if tol is None else tol
    if k < 1:
        raise PreconditionError("k must be at least 1")
    if k > seq.dim:
        raise PreconditionError(f"k = {k} exceeds the dimension {seq.dim}")
    if len(seq) < MIN_POINTS:
        raise PreconditionError(f"need at least {MIN_POINTS} points, got {len(seq)}")
    frame, history, deviations = estimate_levels(
        seq.array, _as_array(seq.limit), k, seq.tail_start(settings.tail_fraction)
    )
    frame = _orthonormalize(frame)
    converged = tuple(d <= tol for d in deviations)
    for level, ok in enumerate(converged, start=1):
        if not ok:
            log.warning("level %d did not stabilize (tail deviation %.3e > %.1e)", level, deviations[level - 1], tol)
    nf = DirectionFrame(seq.dim, tuple(tuple(float(c) for c in u) for u in frame), "numeric", settings.frame_tol)
    return TangentEstimate(nf, tuple(history), tuple(deviations), converged, tol)


# ---------- Exact (x,u)-simplexes ----------

def _max_step(S: Simplex, z: Point, u: Sequence[Fraction]) -> Fraction:
    """Largest ε ≥ 0 with z + ε·u ∈ S (z ∈ S, z + R·u ⊆ aff S)."""
    t = barycentric(S, z)
    t_dir = affine_coordinates(S, add(z, u))
    delta = [b - a for a, b in zip(t, t_dir)]
    bounds = [ti / -di for ti, di in zip(t, delta) if di < 0]
    if not bounds:
        raise PreconditionError("direction does not leave the simplex")
    return min(bounds)


def tangent_simplex_in_simplex(S: Simplex, x: Sequence, frame: DirectionFrame) -> Tuple[Fraction, ...]:
    """λ with C_{x,u,λ} ⊆ S by halving the exact ratio-test step at every level."""
    x = exact(x)
    if barycentric(S, x) is None:
        raise NoTangentSimplex(f"{x} is not in {S}", level=0)
    for u in frame.vectors:
        if affine_coordinates(S, add(x, u)) is None:
            raise NoTangentSimplex(f"x + R·u is not inside aff {S}", level=0)
    lengths: List[Fraction] = []
    z = x
    for level, u in enumerate(frame.vectors, start=1):
        eps = _max_step(S, z, u)
        if eps == 0:
            raise NoTangentSimplex(f"no room along u_{level} at {z} inside {S}", level=level)
        lam = eps / 2
        lengths.append(lam)
        z = add(z, scale(lam, u))
    return tuple(lengths)


def tangent_simplex_in_polyhedron(P: Polyhedron, x: Sequence, frame: DirectionFrame) -> CSimplexSpec:
    return tangent_simplex_with_generator(P, x, frame)[1]


def tangent_simplex_with_generator(
    P: Polyhedron, x: Sequence, frame: DirectionFrame
) -> Tuple[Simplex, CSimplexSpec]:
    """The first generator S of P that holds an (x,u)-simplex, with that simplex."""
    if frame.mode != "exact":
        raise PreconditionError("an exact frame is required")
    if P.ambient != frame.dim:
        raise DimensionMismatch("frame and polyhedron in different dimensions")
    x = exact(x)
    failures: List[Tuple[Simplex, NoTangentSimplex]] = []
    for S in P.generators:
        try:
            lengths = tangent_simplex_in_simplex(S, x, frame)
        except NoTangentSimplex as e:
            failures.append((S, e))
            continue
        spec = CSimplexSpec(x, frame, lengths)
        if not simplex_in_simplex(build_c_simplex(spec), S):
            raise PreconditionError("constructed C-simplex escapes its generator")
        log.info("(x,u)-simplex in %s with lengths %s", S, [linalg.fraction_str(l) for l in lengths])
        return S, spec
    level = max((e.level or 0 for _, e in failures), default=0)
    detail = "; ".join(f"{S}: {e}" for S, e in failures) or "no generators"
    raise NoTangentSimplex(f"no generator admits the frame ({detail})", level=level)


def face_containment_holds(S: Simplex, spec: CSimplexSpec) -> bool:
    """Every face of S containing z_l contains all of C_{x,u(l),λ(l)}, for every level l."""
    pts = spec.vertex_points()
    faces = S.faces()
    for l, z in enumerate(pts):
        prefix = pts[: l + 1]
        for F in faces:
            if contains(F, z) and not all(contains(F, p) for p in prefix):
                return False
    return True


# ---------- Certificates ----------

@dataclass(frozen=True)
class TangentCertificate:
    """(x, u, λ, S, F) asserting a rationally outgoing k-tangent."""

    x: Point
    frame: DirectionFrame
    lengths: Tuple[Fraction, ...]
    S: Simplex
    F: Simplex
    meta: Dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.x)
        if self.frame.dim != n or self.S.ambient != n or self.F.ambient != n:
            raise CertificateError("certificate parts live in different dimensions")
        if self.frame.mode != "exact":
            raise CertificateError("certificates carry exact frames")
        if len(self.lengths) != self.frame.k:
            raise CertificateError(f"{len(self.lengths)} lengths for {self.frame.k} directions")
        object.__setattr__(self, "x", exact(self.x))

    @property
    def k(self) -> int:
        return self.frame.k

    @property
    def ambient(self) -> int:
        return len(self.x)

    @property
    def c_spec(self) -> CSimplexSpec:
        return CSimplexSpec(self.x, self.frame, self.lengths)


def _points_in(P: Simplex, X: ClosedSet) -> List[Point]:
    return [p for p in X.iter_points() if contains(P, p)]


def check_rationally_outgoing(
    cert: TangentCertificate, X: ClosedSet, seq: PointSequence | None = None, tol: float | None = None
) -> Dict:
    """Exact checks of the certificate geometry plus advisory numeric tangency evidence."""
    tol = settings.numeric_tol if tol is None else tol
    if X.ambient != cert.ambient:
        raise DimensionMismatch(f"closed set in R^{X.ambient} vs certificate in R^{cert.ambient}")
    checks = []
    S, F = cert.S, cert.F
    face_ok = F.is_face_of(S)
    checks.append(check(
        "a", "rational simplex with face", face_ok and cert.k < cert.ambient,
        "" if face_ok and cert.k < cert.ambient else
        ("F is not a face of S" if not face_ok else f"k = {cert.k} is not below n = {cert.ambient}"),
        anchor="rationally outgoing (a)",
    ))
    try:
        C = build_c_simplex(cert.c_spec)
    except MVTangentError as e:  # degenerate frames fail (b) and (c)
        C = None
        log.warning("C-simplex could not be built: %s", e)
    in_s = C is not None and simplex_in_simplex(C, S)
    checks.append(check(
        "b", "C-simplex inside S", in_s, "" if in_s else "some vertex of C_{x,u,λ} lies outside S",
        anchor="rationally outgoing (b)",
    ))
    not_in_f = C is not None and not simplex_in_simplex(C, F)
    checks.append(check(
        "c", "C-simplex not inside F", not_in_f, "" if not_in_f else "C_{x,u,λ} ⊆ F",
        anchor="rationally outgoing (c)",
    ))

    d_issues = []
    poly = X.polyhedral_part
    if poly is not None and not poly.is_empty:
        sx = intersect_polyhedra(Polyhedron.of([S]), poly)
        fx = intersect_polyhedra(Polyhedron.of([F]), poly)
        if not polyhedra_equal(sx, fx):
            d_issues.append("polyhedral part meets S outside F")
    extra = [p for p in _points_in(S, X) if not contains(F, p)]
    if extra:
        d_issues.append(f"{len(extra)} point(s) of X in S \\ F, first {tuple(map(linalg.fraction_str, extra[0]))}")
    checks.append(check("d", "F ∩ X = S ∩ X", not d_issues, "; ".join(d_issues), anchor="rationally outgoing (d)"))

    if seq is not None:
        checks.append(_tangency_check(cert, seq, tol))
    report = build_report(checks, k=cert.k, n=cert.ambient)
    log.info("certificate check: ok=%s", report["ok"])
    return report


def _tangency_check(cert: TangentCertificate, seq: PointSequence, tol: float) -> Dict:
    try:
        est = detect_k_tangent(seq, cert.k, tol)
    except (PreconditionError, SpanMembershipError) as e:
        return check("e", "numeric tangency evidence", False, str(e), advisory=True, anchor="k-tangent")
    want = cert.frame.unit_vectors()
    err = max(float(np.max(np.abs(np.array(a) - np.array(b)))) for a, b in zip(want, est.frame.vectors))
    same_limit = exact(seq.limit) == cert.x
    ok = same_limit and est.ok and err <= tol
    detail = f"max deviation {err:.3e} (tol {tol:.1e})"
    if not same_limit:
        detail = "sequence limit differs from x; " + detail
    return check("e", "numeric tangency evidence", ok, detail, advisory=True, anchor="k-tangent")


def check_planar_criterion(X: ClosedSet, x: Sequence, u: Sequence, lam) -> Dict:
    """conv(x, x + λu) ∩ X = {x} for rational x, u, λ in the plane."""
    x = exact(x)
    u = tuple(linalg.to_fraction(c, name="u") for c in u)
    lam = linalg.to_fraction(lam, name="lambda")
    if len(x) != 2 or len(u) != 2 or X.ambient != 2:
        raise DimensionMismatch("the planar criterion lives in R^2")
    if lam <= 0 or all(c == 0 for c in u):
        raise PreconditionError("need λ > 0 and u ≠ 0")
    seg = Simplex((x, add(x, scale(lam, u))))
    point = Simplex((x,))
    checks = []
    in_x = any(p == x for p in X.iter_points()) or (
        X.polyhedral_part is not None and any(contains(g, x) for g in X.polyhedral_part.generators)
    )
    checks.append(check("x-in-X", "x ∈ X", in_x, anchor="planar criterion"))
    issues = []
    poly = X.polyhedral_part
    if poly is not None and not poly.is_empty:
        meet = intersect_polyhedra(Polyhedron.of([seg]), poly)
        if not meet.is_empty and not polyhedra_equal(meet, Polyhedron.of([point])):
            issues.append("polyhedral part meets the segment away from x")
    extra = [p for p in _points_in(seg, X) if p != x]
    if extra:
        issues.append(f"{len(extra)} sample(s) on the segment, first {tuple(map(linalg.fraction_str, extra[0]))}")
    checks.append(check("segment", "conv(x, x+λu) ∩ X = {x}", not issues, "; ".join(issues), anchor="planar criterion"))
    return build_report(checks)


def certificate_from_planar(x: Sequence, u: Sequence, lam) -> TangentCertificate:
    """S = conv(x, x + λu), F = {x}."""
    x = exact(x)
    frame = DirectionFrame.exact([u])
    lam = linalg.to_fraction(lam, name="lambda")
    S = Simplex((x, add(x, scale(lam, frame.vectors[0]))))
    return TangentCertificate(x, frame, (lam,), S, Simplex((x,)))
