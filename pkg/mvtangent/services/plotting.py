"""
Static SVG pictures of 2-D instances: complexes, polyhedra, sampled closed sets and certificates.

Higher dimensions are drawn as the projection on the first two coordinates, and only on request.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.patches import Polygon as PolygonPatch  # noqa: E402

from ..core.exceptions import DimensionMismatch  # noqa: E402
from ..core.logger import get_logger  # noqa: E402
from .closed_sets import ClosedSet  # noqa: E402
from .complexes import SimplicialComplex  # noqa: E402
from .geometry import Simplex, build_c_simplex  # noqa: E402
from .polyhedra import Polyhedron  # noqa: E402
from .tangents import TangentCertificate  # noqa: E402

log = get_logger("plotting")

plt.rcParams["svg.hashsalt"] = "mvtangent"


def _xy(points: Iterable[Sequence]) -> List[tuple]:
    return [(float(p[0]), float(p[1])) for p in points]


def _draw_simplex(ax, s: Simplex, **style) -> None:
    pts = _xy(s.vertices)
    if len(pts) == 1:
        ax.plot([pts[0][0]], [pts[0][1]], "o", color=style.get("edgecolor", "k"), markersize=4)
    elif len(pts) == 2:
        ax.add_collection(LineCollection([pts], colors=style.get("edgecolor", "k"), linewidths=style.get("linewidth", 1.0)))
    else:
        # projected simplexes of higher dimension are drawn through their vertex hull order
        ax.add_patch(PolygonPatch(pts, closed=True, **style))


def render_svg(
    out: str | Path,
    *,
    complexes: Sequence[SimplicialComplex] = (),
    polyhedra: Sequence[Polyhedron] = (),
    closed_set: ClosedSet | None = None,
    cert: TangentCertificate | None = None,
    force_projection: bool = False,
    title: str | None = None,
) -> List[str]:
    """Writes an SVG file and returns the warnings issued while drawing."""
    dims = {K.ambient for K in complexes} | {P.ambient for P in polyhedra}
    if closed_set is not None:
        dims.add(closed_set.ambient)
    if cert is not None:
        dims.add(cert.ambient)
    if len(dims) > 1:
        raise DimensionMismatch(f"plot parts live in dimensions {sorted(dims)}")
    n = dims.pop() if dims else 2
    warnings = []
    if n != 2:
        if not force_projection:
            raise DimensionMismatch(f"SVG output is for n = 2; got n = {n} (use --force-projection)")
        warnings.append(f"projecting R^{n} on the first two coordinates")
        log.warning(warnings[-1])

    fig, ax = plt.subplots(figsize=(6, 6))
    for K in complexes:
        for s in K.maximal:
            _draw_simplex(ax, s, facecolor="#dde8f5", edgecolor="#34558b", linewidth=0.8)
    for P in polyhedra:
        for g in P.generators:
            _draw_simplex(ax, g, facecolor="#f5dede", edgecolor="#8b3434", linewidth=1.2, alpha=0.7)
    if closed_set is not None:
        for seq in closed_set.samples:
            arr = seq.array
            ax.plot(arr[:, 0], arr[:, 1], ".", color="#222222", markersize=2)
        lims = _xy(closed_set.limits())
        if lims:
            ax.plot([p[0] for p in lims], [p[1] for p in lims], "x", color="#b00000", markersize=6)
    if cert is not None:
        _draw_simplex(ax, cert.S, facecolor="none", edgecolor="#1a7f37", linewidth=2.0)
        _draw_simplex(ax, cert.F, facecolor="none", edgecolor="#b35900", linewidth=2.5)
        _draw_simplex(ax, build_c_simplex(cert.c_spec), facecolor="#c6f0cf", edgecolor="#1a7f37", linewidth=1.0, alpha=0.6)

    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    fig.savefig(str(out), format="svg", metadata={"Date": None})
    plt.close(fig)
    log.info("wrote %s", out)
    return warnings
