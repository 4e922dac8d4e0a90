"""
Dibujo en SVG del polígono y de las trayectorias (1 unidad = 1 cm).
"""

import logging
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from geometry import OralPolygon, SideLabel  # noqa: E402

_logger = logging.getLogger(__name__)

_CM_PER_INCH = 2.54
_PT_PER_INCH = 72.0
_MARGIN_CM = 1.0
_COLORS = ("navy", "firebrick", "forestgreen", "darkorange", "purple", "teal")

_ROOT_TAG = re.compile(r"<svg\b[^>]*>")

# salida reproducible byte a byte
matplotlib.rcParams["svg.hashsalt"] = "oral-billiards"
matplotlib.rcParams["svg.fonttype"] = "none"


def _to_cm_units(svg: str, xmin: float, ymax: float, width: float, height: float) -> str:
    """
    Reescribe la raíz para que una unidad de usuario sea un centímetro.

    El punto de datos (x, y) queda en las coordenadas de usuario (x, −y).
    """
    root = _ROOT_TAG.search(svg)
    if root is None:
        raise ValueError("SVG sin elemento raíz")
    tag = root.group(0)
    tag = re.sub(r'\swidth="[^"]*"', f' width="{width:.6f}cm"', tag)
    tag = re.sub(r'\sheight="[^"]*"', f' height="{height:.6f}cm"', tag)
    tag = re.sub(r'\sviewBox="[^"]*"', f' viewBox="{xmin:.6f} {-ymax:.6f} {width:.6f} {height:.6f}"', tag)
    scale = _CM_PER_INCH / _PT_PER_INCH
    group = f'<g transform="translate({xmin:.6f} {-ymax:.6f}) scale({scale:.10f})">'
    body = svg[root.end():]
    close = body.rfind("</svg>")
    return svg[: root.start()] + tag + "\n" + group + body[:close] + "</g>\n" + body[close:]


def render_svg(polygon: OralPolygon, paths, out: str | Path, title: str | None = None) -> Path:
    """
    Escribe un SVG con el polígono, sus etiquetas y una o varias trayectorias.

    Args:
        polygon (OralPolygon): Mesa de billar.
        paths: Lista de trayectorias, cada una una lista de puntos (x, y) en cm.
            También se acepta una sola lista de puntos.
        out: Ruta del archivo .svg.
        title (str | None): Título opcional, dentro del margen superior.

    Returns:
        Path: Ruta escrita.
    """
    paths = list(paths)
    if paths and len(paths[0]) == 2 and isinstance(paths[0][0], (int, float)):
        paths = [paths]

    pts = polygon.points
    xmin, ymin = pts.min(axis=0) - _MARGIN_CM
    xmax, ymax = pts.max(axis=0) + _MARGIN_CM
    width, height = float(xmax - xmin), float(ymax - ymin)
    fig = plt.figure(figsize=(width / _CM_PER_INCH, height / _CM_PER_INCH))
    try:
        # los ejes ocupan toda la figura: 1 unidad de datos = 1 cm en la página
        ax = fig.add_axes((0.0, 0.0, 1.0, 1.0))
        closed = list(pts) + [pts[0]]
        ax.plot([p[0] for p in closed], [p[1] for p in closed], color="black", linewidth=1.2)
        for i, label in enumerate(polygon.side_labels):
            mid = pts[i] + 0.5 * polygon.edges[i] - 0.35 * polygon.normals[i]
            ax.text(mid[0], mid[1], label, ha="center", va="center", fontsize=9)
        if polygon.labial_corner is not None:
            corner = pts[polygon.labial_corner]
            ax.plot(corner[0], corner[1], marker="o", color="black", markersize=4)
            ax.text(corner[0] - 0.3, corner[1] - 0.3, SideLabel.LABIAL.value, fontsize=9)

        for k, path in enumerate(paths):
            if len(path) < 2:
                continue
            ax.plot(
                [p[0] for p in path], [p[1] for p in path],
                color=_COLORS[k % len(_COLORS)], linewidth=0.6, marker=".", markersize=2,
            )

        ax.set_xlim(xmin, xmax)
        ax.set_ylim(ymin, ymax)
        ax.axis("off")
        if title:
            ax.text(xmin + 0.2, ymax - 0.2, title, ha="left", va="top", fontsize=9)
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    svg = out.read_text(encoding="utf-8")
    out.write_text(_to_cm_units(svg, float(xmin), float(ymax), width, height), encoding="utf-8")
    _logger.debug("SVG escrito en %s (%d trayectorias)", out, len(paths))
    return out
