"""
JSON models for every artifact, plus converters to and from the domain types.

Rationals travel as strings "p/q" (or "p"); exact fields reject JSON floats. Sample coordinates
may be floats.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Type, TypeVar, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, model_validator

from ..core.exceptions import SchemaError
from .closed_sets import ClosedSet, PointSequence, SequenceFormula
from .complexes import SimplicialComplex
from .geometry import CSimplexSpec, DirectionFrame, Point, Simplex
from .linalg import fraction_str, to_fraction
from .mcnaughton import LeqResult, McNaughtonFn, ZMap, extend_from_vertices
from .polyhedra import Polyhedron
from .tangents import TangentCertificate, TangentEstimate
from .triangulation import validate_complex

M = TypeVar("M", bound=BaseModel)


def _rational(v: Any) -> str:
    if isinstance(v, bool) or isinstance(v, float):
        raise ValueError(f"exact rational expected (\"p/q\" string or integer), got {v!r}")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        try:
            return fraction_str(Fraction(v.strip()))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational: {v!r}")
    raise ValueError(f"exact rational expected, got {type(v).__name__}")


def _sample(v: Any) -> Union[str, float]:
    if isinstance(v, float):
        return v
    return _rational(v)


Rational = Annotated[str, BeforeValidator(_rational)]
SampleCoord = Annotated[Union[str, float], BeforeValidator(_sample)]
PointModel = List[Rational]


class SimplexModel(BaseModel):
    vertices: List[PointModel] = Field(min_length=1)


class ComplexModel(BaseModel):
    cells: List[SimplexModel] = Field(min_length=1)


class PolyhedronModel(BaseModel):
    generators: List[SimplexModel] = []
    empty: bool = False
    dim: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_empty(self):
        if not self.generators and self.dim is None:
            raise ValueError("an empty polyhedron needs its ambient dimension in 'dim'")
        if self.empty and self.generators:
            raise ValueError("'empty' polyhedron with generators")
        return self


class ZMapModel(BaseModel):
    carrier: ComplexModel
    values: Dict[str, Union[Rational, List[Rational]]]


class FormulaTerm(BaseModel):
    coef: Rational
    power: int = Field(ge=0)


class FormulaModel(BaseModel):
    coordinates: List[List[FormulaTerm]] = Field(min_length=1)
    start: int = Field(default=1, ge=1)
    stop: int
    step: int = Field(default=1, ge=1)


class SequenceModel(BaseModel):
    points: List[List[SampleCoord]] | None = None
    limit: PointModel | None = None
    formula: FormulaModel | None = None

    @model_validator(mode="after")
    def _need_points(self):
        if self.points is None and self.formula is None:
            raise ValueError("a sequence needs 'points' or a 'formula'")
        if self.points is not None and self.limit is None:
            raise ValueError("explicit points need their 'limit'")
        return self


class ClosedSetModel(BaseModel):
    polyhedral_part: PolyhedronModel | None = None
    samples: List[SequenceModel] = []
    declared_limits: List[PointModel] = []


class CertificateModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    x: PointModel
    frame: List[PointModel] = Field(min_length=1)
    lengths: List[Rational] = Field(alias="lambda", min_length=1)
    S: SimplexModel
    F: SimplexModel


class WitnessPairModel(BaseModel):
    carrier: ComplexModel
    f: Dict[str, Rational]
    g: Dict[str, Rational]
    certificate: CertificateModel | None = None


class EvalInputModel(BaseModel):
    zmap: ZMapModel
    points: List[List[SampleCoord]] = Field(min_length=1)


class LeqInputModel(BaseModel):
    f: ZMapModel
    g: ZMapModel
    m: int = Field(ge=1)
    X: ClosedSetModel


class TangentSimplexInputModel(BaseModel):
    polyhedron: PolyhedronModel
    x: PointModel
    frame: List[PointModel] = Field(min_length=1)


class TangentDetectInputModel(BaseModel):
    sequence: SequenceModel
    k: int = Field(default=1, ge=1)


class PlanarInputModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    x: PointModel
    u: PointModel
    lam: Rational = Field(alias="lambda")


class PullbackInputModel(BaseModel):
    eta: ZMapModel
    X: ClosedSetModel
    sequence: SequenceModel
    u: List[float] = Field(min_length=2, max_length=2)
    epsilon: Rational
    x: PointModel


# ---------- IO ----------

def load(model: Type[M], path: str | Path) -> M:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"cannot read: {e.strerror}", location=str(path)) from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno}, column {e.colno}: {e.msg}", location=str(path)) from e
    return parse(model, raw, str(path))


def parse(model: Type[M], raw: Any, location: str = "input") -> M:
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        where = ".".join(str(p) for p in err["loc"]) or "<root>"
        raise SchemaError(f"{where}: {err['msg']}", location=location) from e


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------- Converters ----------

def point_from(coords: List) -> Point:
    return tuple(to_fraction(c) for c in coords)


def point_json(p) -> List[str]:
    return [fraction_str(c) for c in p]


def simplex_from(m: SimplexModel) -> Simplex:
    return Simplex(tuple(point_from(v) for v in m.vertices))


def simplex_json(s: Simplex) -> Dict:
    return {"vertices": [point_json(v) for v in s.vertices]}


def complex_from(m: ComplexModel) -> SimplicialComplex:
    return validate_complex(simplex_from(c) for c in m.cells)


def complex_json(K: SimplicialComplex) -> Dict:
    return {"cells": [simplex_json(s) for s in K.maximal]}


def polyhedron_from(m: PolyhedronModel) -> Polyhedron:
    if not m.generators:
        return Polyhedron.empty(m.dim)
    return Polyhedron.of([simplex_from(g) for g in m.generators], m.dim)


def polyhedron_json(P: Polyhedron) -> Dict:
    out = {"generators": [simplex_json(g) for g in P.generators], "dim": P.ambient}
    if P.is_empty:
        out["empty"] = True
    return out


def _vertex_values(K: SimplicialComplex, values: Dict[str, Any]) -> Dict[Point, Any]:
    out = {}
    verts = K.vertices
    for key, val in values.items():
        try:
            i = int(key)
            v = verts[i]
        except (ValueError, IndexError):
            raise SchemaError(f"values: {key!r} is not a vertex index (0..{len(verts) - 1})")
        out[v] = [to_fraction(c) for c in val] if isinstance(val, list) else to_fraction(val)
    missing = [i for i, v in enumerate(verts) if v not in out]
    if missing:
        raise SchemaError(f"values: no value for vertex index {missing[0]}")
    return out


def zmap_from(m: ZMapModel, mcnaughton: bool = False) -> ZMap:
    K = complex_from(m.carrier)
    return extend_from_vertices(K, _vertex_values(K, m.values), mcnaughton=mcnaughton)


def _value_json(val: Point, scalar: bool):
    return fraction_str(val[0]) if scalar else point_json(val)


def zmap_json(f: ZMap, with_pieces: bool = False) -> Dict:
    scalar = isinstance(f, McNaughtonFn)
    out = {
        "carrier": complex_json(f.carrier),
        "values": {str(i): _value_json(f.values[v], scalar) for i, v in enumerate(f.carrier.vertices)},
    }
    if with_pieces:
        out["pieces"] = [
            {"cell": simplex_json(s), "A": [list(r) for r in f.pieces[s].matrix], "b": list(f.pieces[s].offset)}
            for s in f.carrier.maximal
        ]
    return out


def _coord(c) -> Fraction | float:
    return c if isinstance(c, float) else to_fraction(c)


def sequence_from(m: SequenceModel) -> PointSequence:
    if m.formula is not None:
        formula = SequenceFormula(
            tuple(tuple((to_fraction(t.coef), t.power) for t in terms) for terms in m.formula.coordinates),
            m.formula.start,
            m.formula.stop,
            m.formula.step,
        )
        seq = PointSequence.from_formula(formula)
        if m.limit is not None and point_from(m.limit) != seq.limit:
            raise SchemaError("limit disagrees with the formula's limit")
        return seq
    return PointSequence(tuple(tuple(_coord(c) for c in p) for p in m.points), point_from(m.limit))


def closed_set_from(m: ClosedSetModel) -> ClosedSet:
    poly = polyhedron_from(m.polyhedral_part) if m.polyhedral_part is not None else None
    return ClosedSet(poly, tuple(sequence_from(s) for s in m.samples), tuple(point_from(p) for p in m.declared_limits))


def frame_from(vectors: List[List]) -> DirectionFrame:
    return DirectionFrame.exact([[to_fraction(c) for c in v] for v in vectors])


def certificate_from(m: CertificateModel) -> TangentCertificate:
    return TangentCertificate(
        point_from(m.x),
        frame_from(m.frame),
        tuple(to_fraction(l) for l in m.lengths),
        simplex_from(m.S),
        simplex_from(m.F),
    )


def certificate_json(cert: TangentCertificate) -> Dict:
    return {
        "x": point_json(cert.x),
        "frame": [point_json(u) for u in cert.frame.vectors],
        "lambda": [fraction_str(l) for l in cert.lengths],
        "S": simplex_json(cert.S),
        "F": simplex_json(cert.F),
    }


def c_spec_json(spec: CSimplexSpec) -> Dict:
    return {
        "apex": point_json(spec.apex),
        "frame": [point_json(u) for u in spec.frame.vectors],
        "lambda": [fraction_str(l) for l in spec.lengths],
        "vertices": [point_json(v) for v in spec.vertex_points()],
    }


def estimate_json(est: TangentEstimate) -> Dict:
    return {
        "frame": [list(u) for u in est.frame.vectors],
        "tol": est.tol,
        "ok": est.ok,
        "levels": est.diagnostics(),
    }


def leq_json(res: LeqResult, m: int) -> Dict:
    return {
        "holds": res.holds,
        "m": m,
        "witness": point_json(res.witness) if res.witness is not None else None,
        "source": res.source,
    }


def witness_pair_json(pair) -> Dict:
    verts = pair.carrier.vertices
    out = {
        "carrier": complex_json(pair.carrier),
        "f": {str(i): fraction_str(pair.f.values[v][0]) for i, v in enumerate(verts)},
        "g": {str(i): fraction_str(pair.g.values[v][0]) for i, v in enumerate(verts)},
    }
    if pair.cert is not None:
        out["certificate"] = certificate_json(pair.cert)
    return out


def witness_pair_from(m: WitnessPairModel):
    from .witness import WitnessPair

    K = complex_from(m.carrier)
    f = extend_from_vertices(K, _vertex_values(K, m.f), mcnaughton=True)
    g = extend_from_vertices(K, _vertex_values(K, m.g), mcnaughton=True)
    cert = certificate_from(m.certificate) if m.certificate is not None else None
    return WitnessPair(f, g, K, cert)


def pullback_json(res) -> Dict:
    return {
        "z": point_json(res.z),
        "k": res.k,
        "frame": [list(w) for w in res.frame.vectors],
        "A": [list(r) for r in res.A],
        "b": list(res.b),
        "c": res.c,
        "cell": simplex_json(res.cell),
        "lambda": [fraction_str(l) for l in res.lengths] if res.lengths is not None else None,
        "certificate": certificate_json(res.cert) if res.cert is not None else None,
        "diagnostics": res.diagnostics,
    }
