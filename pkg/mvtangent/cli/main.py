"""
Command line entry point: every pipeline stage on JSON files.

Exit codes: 0 verified success, 1 verified negative verdict, 2 input or precondition error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Literal, Tuple

from pydantic import BaseModel, Field, ValidationError

from ..core.config import settings
from ..core.exceptions import MVTangentError, NoTangentSimplex, SchemaError
from ..core.logger import get_logger
from ..services import schemas
from ..services.geometry import elementary_divisors, is_regular
from ..services.mcnaughton import leq_scalar_multiple, preimage_polyhedron, zero_set
from ..services.plotting import render_svg
from ..services.reports import build_report, check, summary_line
from ..services.tangents import (
    certificate_from_planar,
    check_planar_criterion,
    check_rationally_outgoing,
    detect_k_tangent,
    face_containment_holds,
    tangent_simplex_with_generator,
)
from ..services.triangulation import regularize, subdivide_with_subpolyhedron, union_property_holds
from ..services.witness import build_witness, crux_report, pullback_tangent, refute_ideal_membership

log = get_logger("cli")

Command = Literal[
    "regularize",
    "subdivide",
    "check-regular",
    "extend-zmap",
    "eval",
    "zero-set",
    "preimage",
    "leq",
    "tangent-detect",
    "tangent-simplex",
    "check-outgoing",
    "witness",
    "verify-witness",
    "pullback",
    "plot2d",
    "check-planar",
]

# command -> (input names, help)
COMMANDS: Dict[str, Tuple[Tuple[str, ...], str]] = {
    "regularize": (("complex",), "regular subdivision of a rational complex"),
    "subdivide": (("complex", "polyhedron"), "regular subdivision whose cells inside Q cover Q"),
    "check-regular": (("simplex",), "regularity of a simplex or of every cell of a complex"),
    "extend-zmap": (("zmap",), "affine pieces of the Z-map with the given vertex values"),
    "eval": (("eval",), "evaluate a Z-map at points"),
    "zero-set": (("zmap",), "zero set of a Z-map as a rational polyhedron"),
    "preimage": (("zmap", "polyhedron"), "preimage of a polyhedron under a Z-map"),
    "leq": (("leq",), "decide f <= m*g on a closed set"),
    "tangent-detect": (("sequence",), "numeric k-tangent of a sampled sequence"),
    "tangent-simplex": (("input",), "(x,u)-simplex inside a polyhedron"),
    "check-outgoing": (("closed_set", "certificate"), "check a rationally outgoing tangent certificate"),
    "witness": (("certificate",), "McNaughton witness pair f, g from a certificate"),
    "verify-witness": (("pair", "closed_set"), "crux check plus refutation of f in <g> up to m_max"),
    "pullback": (("input",), "pull a planar 1-tangent back through a Z-map"),
    "plot2d": (("inputs",), "SVG drawing of 2-D complexes, polyhedra, closed sets, certificates"),
    "check-planar": (("closed_set", "input"), "planar criterion conv(x, x+lambda*u) meets X only in x"),
}


class RunConfig(BaseModel):
    command: Command
    inputs: List[str] = Field(min_length=1)
    out: str | None = None
    tol: float | None = Field(default=None, gt=0)
    m_max: int | None = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    n: int | None = Field(default=None, ge=1)
    k: int | None = Field(default=None, ge=1)
    mcnaughton: bool = False
    force_projection: bool = False


class Outcome(BaseModel):
    """What a command produced: a JSON document (or nothing, for files it wrote) and its exit status."""

    status: int = 0
    document: Dict | None = None


def _raw(path: str) -> Dict:
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except OSError as e:
        raise SchemaError(f"cannot read: {e.strerror}", location=path) from e
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno}, column {e.colno}: {e.msg}", location=path) from e


def _verdict(report: Dict) -> Outcome:
    return Outcome(status=0 if report["ok"] else 1, document=report)


# ---------- Commands ----------

def _regularize(cfg: RunConfig) -> Outcome:
    K = schemas.complex_from(schemas.load(schemas.ComplexModel, cfg.inputs[0]))
    R = regularize(K, seed=cfg.seed)
    return Outcome(document=schemas.complex_json(R))


def _subdivide(cfg: RunConfig) -> Outcome:
    K = schemas.complex_from(schemas.load(schemas.ComplexModel, cfg.inputs[0]))
    Q = schemas.polyhedron_from(schemas.load(schemas.PolyhedronModel, cfg.inputs[1]))
    D = subdivide_with_subpolyhedron(K, Q, seed=cfg.seed)
    if not union_property_holds(D, Q):
        raise MVTangentError("subdivision lost the union property")
    return Outcome(document=schemas.complex_json(D))


def _check_regular(cfg: RunConfig) -> Outcome:
    raw = _raw(cfg.inputs[0])
    if isinstance(raw, dict) and "cells" in raw:
        cells = list(schemas.complex_from(schemas.parse(schemas.ComplexModel, raw, cfg.inputs[0])).maximal)
    else:
        cells = [schemas.simplex_from(schemas.parse(schemas.SimplexModel, raw, cfg.inputs[0]))]
    checks = []
    for i, s in enumerate(cells):
        ok = is_regular(s)
        detail = ""
        if not ok:
            worst = next(d for d in elementary_divisors(s) if d != 1)
            detail = f"non-regular: elementary divisor {worst}"
        checks.append(check(f"cell-{i}", f"cell {i} is regular", ok, detail, anchor="regular simplex"))
    return _verdict(build_report(checks, divisors=[list(elementary_divisors(s)) for s in cells]))


def _extend_zmap(cfg: RunConfig) -> Outcome:
    f = schemas.zmap_from(schemas.load(schemas.ZMapModel, cfg.inputs[0]), mcnaughton=cfg.mcnaughton)
    return Outcome(document=schemas.zmap_json(f, with_pieces=True))


def _eval(cfg: RunConfig) -> Outcome:
    m = schemas.load(schemas.EvalInputModel, cfg.inputs[0])
    f = schemas.zmap_from(m.zmap)
    values = []
    for p in m.points:
        if any(isinstance(c, float) for c in p):
            values.append(list(f.evaluate_float(p)))
        else:
            values.append(schemas.point_json(f.evaluate(schemas.point_from(p))))
    return Outcome(document={"values": values})


def _zero_set(cfg: RunConfig) -> Outcome:
    f = schemas.zmap_from(schemas.load(schemas.ZMapModel, cfg.inputs[0]))
    return Outcome(document=schemas.polyhedron_json(zero_set(f)))


def _preimage(cfg: RunConfig) -> Outcome:
    f = schemas.zmap_from(schemas.load(schemas.ZMapModel, cfg.inputs[0]))
    R = schemas.polyhedron_from(schemas.load(schemas.PolyhedronModel, cfg.inputs[1]))
    return Outcome(document=schemas.polyhedron_json(preimage_polyhedron(f, R)))


def _leq(cfg: RunConfig) -> Outcome:
    m = schemas.load(schemas.LeqInputModel, cfg.inputs[0])
    f = schemas.zmap_from(m.f, mcnaughton=True)
    g = schemas.zmap_from(m.g, mcnaughton=True)
    res = leq_scalar_multiple(f, g, m.m, schemas.closed_set_from(m.X))
    detail = "" if res.holds else f"violated at {schemas.point_json(res.witness)}"
    report = build_report([check("leq", f"f <= {m.m}*g on X", res.holds, detail, anchor="principal ideal")], **schemas.leq_json(res, m.m))
    return _verdict(report)


def _tangent_detect(cfg: RunConfig) -> Outcome:
    m = schemas.load(schemas.TangentDetectInputModel, cfg.inputs[0])
    k = cfg.k or m.k
    est = detect_k_tangent(schemas.sequence_from(m.sequence), k, cfg.tol)
    checks = [
        check(f"level-{d['level']}", f"level {d['level']} stabilizes", d["converged"], f"tail deviation {d['tail_deviation']:.3e}", anchor="k-tangent")
        for d in est.diagnostics()
    ]
    return _verdict(build_report(checks, estimate=schemas.estimate_json(est)))


def _tangent_simplex(cfg: RunConfig) -> Outcome:
    m = schemas.load(schemas.TangentSimplexInputModel, cfg.inputs[0])
    P = schemas.polyhedron_from(m.polyhedron)
    frame = schemas.frame_from(m.frame)
    try:
        S, spec = tangent_simplex_with_generator(P, schemas.point_from(m.x), frame)
    except NoTangentSimplex as e:
        return _verdict(build_report([check(
            "exists", "some generator holds an (x,u)-simplex", False, f"{e} (level {e.level})",
            anchor="(x,u)-simplex",
        )]))
    checks = [
        check("exists", "some generator holds an (x,u)-simplex", True, anchor="(x,u)-simplex"),
        check(
            "faces", "faces of S meeting some z_l contain C up to l", face_containment_holds(S, spec),
            anchor="(x,u)-simplex face property",
        ),
    ]
    return _verdict(build_report(checks, generator=schemas.simplex_json(S), c_simplex=schemas.c_spec_json(spec)))


def _closed_set(path: str):
    return schemas.closed_set_from(schemas.load(schemas.ClosedSetModel, path))


def _check_outgoing(cfg: RunConfig) -> Outcome:
    X = _closed_set(cfg.inputs[0])
    cert = schemas.certificate_from(schemas.load(schemas.CertificateModel, cfg.inputs[1]))
    seq = next((s for s in X.samples if s.limit == cert.x), None)
    return _verdict(check_rationally_outgoing(cert, X, seq, cfg.tol))


def _witness(cfg: RunConfig) -> Outcome:
    cert = schemas.certificate_from(schemas.load(schemas.CertificateModel, cfg.inputs[0]))
    pair = build_witness(cert, cfg.n or cert.ambient)
    return Outcome(document=schemas.witness_pair_json(pair))


def _verify_witness(cfg: RunConfig) -> Outcome:
    pair = schemas.witness_pair_from(schemas.load(schemas.WitnessPairModel, cfg.inputs[0]))
    X = _closed_set(cfg.inputs[1])
    crux = crux_report(pair, X)
    refutation = refute_ideal_membership(pair, X, cfg.m_max)
    report = build_report(
        crux["checks"] + refutation["checks"],
        m_max=refutation["m_max"],
        refutations=refutation["refutations"],
        refuted_up_to=refutation["refuted_up_to"],
    )
    return _verdict(report)


def _pullback(cfg: RunConfig) -> Outcome:
    m = schemas.load(schemas.PullbackInputModel, cfg.inputs[0])
    eta = schemas.zmap_from(m.eta)
    res = pullback_tangent(
        eta, schemas.closed_set_from(m.X), schemas.sequence_from(m.sequence), m.u, m.epsilon, schemas.point_from(m.x)
    )
    doc = schemas.pullback_json(res)
    checks = [check("certificate", "rationalized certificate passes (a)-(d)", res.cert is not None,
                    res.diagnostics.get("certificate_error", ""), anchor="k-tangent pullback")]
    return _verdict(build_report(checks, result=doc))


def _classify(path: str, raw) -> Dict:
    if not isinstance(raw, dict):
        raise SchemaError("expected a JSON object", location=path)
    if "cells" in raw:
        return {"complexes": schemas.complex_from(schemas.parse(schemas.ComplexModel, raw, path))}
    if "carrier" in raw and "values" in raw:
        return {"complexes": schemas.complex_from(schemas.parse(schemas.ComplexModel, raw["carrier"], path))}
    if "generators" in raw:
        return {"polyhedra": schemas.polyhedron_from(schemas.parse(schemas.PolyhedronModel, raw, path))}
    if "S" in raw and "frame" in raw:
        return {"cert": schemas.certificate_from(schemas.parse(schemas.CertificateModel, raw, path))}
    if {"samples", "polyhedral_part", "declared_limits"} & raw.keys():
        return {"closed_set": schemas.closed_set_from(schemas.parse(schemas.ClosedSetModel, raw, path))}
    raise SchemaError("cannot tell what to draw from this document", location=path)


def _plot2d(cfg: RunConfig) -> Outcome:
    if not cfg.out:
        raise SchemaError("plot2d needs --out <file.svg>")
    parts: Dict = {"complexes": [], "polyhedra": [], "closed_set": None, "cert": None}
    for path in cfg.inputs:
        for key, value in _classify(path, _raw(path)).items():
            if isinstance(parts[key], list):
                parts[key].append(value)
            else:
                parts[key] = value
    warnings = render_svg(cfg.out, force_projection=cfg.force_projection, **parts)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return Outcome()


def _check_planar(cfg: RunConfig) -> Outcome:
    X = _closed_set(cfg.inputs[0])
    m = schemas.load(schemas.PlanarInputModel, cfg.inputs[1])
    report = check_planar_criterion(X, schemas.point_from(m.x), schemas.point_from(m.u), m.lam)
    if report["ok"]:
        cert = certificate_from_planar(schemas.point_from(m.x), schemas.point_from(m.u), m.lam)
        report["certificate"] = schemas.certificate_json(cert)
    return _verdict(report)


HANDLERS: Dict[str, Callable[[RunConfig], Outcome]] = {
    "regularize": _regularize,
    "subdivide": _subdivide,
    "check-regular": _check_regular,
    "extend-zmap": _extend_zmap,
    "eval": _eval,
    "zero-set": _zero_set,
    "preimage": _preimage,
    "leq": _leq,
    "tangent-detect": _tangent_detect,
    "tangent-simplex": _tangent_simplex,
    "check-outgoing": _check_outgoing,
    "witness": _witness,
    "verify-witness": _verify_witness,
    "pullback": _pullback,
    "plot2d": _plot2d,
    "check-planar": _check_planar,
}


def _emit(cfg: RunConfig, document: Dict) -> None:
    text = schemas.dumps(document)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if "checks" in document:
        print(summary_line(document), file=sys.stderr)
        for issue in document["issues"]:
            print(f"  {issue}", file=sys.stderr)


def run(config: RunConfig) -> int:
    """Runs one command; returns the exit status."""
    log.debug("run %s on %s", config.command, config.inputs)
    try:
        outcome = HANDLERS[config.command](config)
    except MVTangentError as e:
        print(f"error: {e}", file=sys.stderr)
        log.debug("command %s failed", config.command, exc_info=True)
        return 2
    if outcome.document is not None:
        _emit(config, outcome.document)
    return outcome.status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvtangent",
        description="Exact polyhedral checks for strong semisimplicity of MV-algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (inputs, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        if inputs == ("inputs",):
            p.add_argument("inputs", nargs="+", help="JSON documents to draw")
        else:
            for arg in inputs:
                p.add_argument(arg, help=f"{arg.replace('_', ' ')} JSON file")
        p.add_argument("--out", help="write the result here instead of stdout")
        p.add_argument("--tol", type=float, help=f"numeric tolerance (default {settings.numeric_tol})")
        p.add_argument("--m-max", dest="m_max", type=int, help=f"largest m to refute (default {settings.m_max_default})")
        p.add_argument("--seed", type=int, default=0, help="tie-break seed for re-triangulation (0 = lexicographic)")
        p.add_argument("--n", type=int, help="ambient dimension of the witness cube")
        p.add_argument("--k", type=int, help="number of tangent levels")
        p.add_argument("--mcnaughton", action="store_true", help="require [0,1]-valued scalar values")
        p.add_argument("--force-projection", dest="force_projection", action="store_true",
                       help="draw n > 2 as the projection on the first two coordinates")
    return parser


def main(argv: List[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = vars(args)
    inputs = fields.pop("inputs", None)
    if inputs is None:
        inputs = [fields.pop(name) for name in COMMANDS[args.command][0]]
    try:
        config = RunConfig(inputs=inputs, **fields)
    except ValidationError as e:
        err = e.errors()[0]
        print(f"error: --{'-'.join(str(p) for p in err['loc'])}: {err['msg']}", file=sys.stderr)
        return 2
    try:
        return run(config)
    except Exception:
        log.exception("unexpected failure in %s", config.command)
        return 2
