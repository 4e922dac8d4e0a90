"""
Geometría del polígono oral: etiquetas de lado, polígono convexo con mandíbula
y velo móviles, reescalado y erosión por el radio de la bola.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np
from pydantic import ValidationError

import config
from exception import ConfigError, GeometryError
from models import PolygonConfig

_logger = logging.getLogger(__name__)

_CONVEXITY_TOL = 1e-12


class SideLabel(str, Enum):
    """Alfabeto poligonal. ϕ etiqueta una esquina; los demás, lados."""
    GLOTTAL = "ʔ"
    LABIAL = "ϕ"
    DENTAL = "θ"
    PALATAL = "ç"
    VELAR_PALATAL = "xⁱ"
    VELAR = "x"
    UVULAR = "χ"

    def __str__(self) -> str:
        return self.value


POLYGONAL_ALPHABET = tuple(label.value for label in SideLabel)


def _rotate(v: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def line_intersection(p1, d1, p2, d2) -> np.ndarray:
    """
    Intersección de las rectas p1 + t·d1 y p2 + u·d2.

    Raises:
        GeometryError: Si las rectas son paralelas.
    """
    p1, d1, p2, d2 = (np.asarray(a, dtype=float) for a in (p1, d1, p2, d2))
    det = d1[0] * (-d2[1]) + d2[0] * d1[1]
    if abs(det) < 1e-14:
        raise GeometryError("Rectas paralelas: no hay intersección")
    r = p2 - p1
    t = (r[0] * (-d2[1]) + d2[0] * r[1]) / det
    return p1 + t * d1


@dataclass(frozen=True)
class OralPolygon:
    """
    Polígono convexo etiquetado. Los vértices van en sentido antihorario y el
    lado i une el vértice i con el i+1.

    Attributes:
        vertices (tuple): Vértices (x, y) en cm.
        side_labels (tuple): Una etiqueta distinta por lado.
        labial_corner (int | None): Índice del vértice ϕ.
        jaw_drop (float): Descenso acumulado de la mandíbula (cm).
        jaw_hinge (float): Giro acumulado de la mandíbula (rad).
        velum_hinge (float): Giro acumulado del lado x (rad).
        velum_closed (bool): Lados xⁱ y x fusionados.
        scale (float | None): Longitud de la mandíbula en la pose neutra (cm).
        name (str): Nombre para catálogos y salidas.
    """
    vertices: tuple[tuple[float, float], ...]
    side_labels: tuple[str, ...]
    labial_corner: int | None = None
    jaw_drop: float = 0.0
    jaw_hinge: float = 0.0
    velum_hinge: float = 0.0
    velum_closed: bool = False
    scale: float | None = None
    name: str = field(default="polygon", compare=False)

    def __post_init__(self):
        n = len(self.vertices)
        if n < 3:
            raise GeometryError("Un polígono necesita al menos 3 vértices")
        if len(self.side_labels) != n:
            raise GeometryError("Debe haber exactamente una etiqueta por lado")
        if len(set(self.side_labels)) != n:
            raise GeometryError("Las etiquetas de lado deben ser distintas")
        if self.labial_corner is not None and not 0 <= self.labial_corner < n:
            raise GeometryError("labial_corner fuera de rango")
        if not np.all(np.isfinite(self.points)):
            raise GeometryError("Vértices no finitos")
        if np.any(self.lengths <= 0):
            raise GeometryError("Vértices repetidos")
        if not self.is_convex():
            raise GeometryError(f"El polígono '{self.name}' no es convexo y simple")

    @classmethod
    def from_points(cls, points, labels=None, **kwargs) -> "OralPolygon":
        """Construye un polígono; sin etiquetas usa a, b, c, ..."""
        pts = tuple((float(x), float(y)) for x, y in points)
        if labels is None:
            labels = [chr(ord("a") + i) for i in range(len(pts))]
        return cls(vertices=pts, side_labels=tuple(str(l) for l in labels), **kwargs)

    @cached_property
    def points(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @cached_property
    def edges(self) -> np.ndarray:
        return np.roll(self.points, -1, axis=0) - self.points

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.hypot(self.edges[:, 0], self.edges[:, 1])

    @cached_property
    def tangents(self) -> np.ndarray:
        return self.edges / self.lengths[:, None]

    @cached_property
    def normals(self) -> np.ndarray:
        """Normales unitarias hacia el interior."""
        t = self.tangents
        return np.column_stack([-t[:, 1], t[:, 0]])

    @cached_property
    def offsets(self) -> np.ndarray:
        # n_i · x >= offsets_i define el interior
        return np.einsum("ij,ij->i", self.normals, self.points)

    @cached_property
    def directions(self) -> np.ndarray:
        """Ángulo de cada lado en [0, 2π)."""
        return np.mod(np.arctan2(self.edges[:, 1], self.edges[:, 0]), 2 * math.pi)

    @cached_property
    def diameter(self) -> float:
        diffs = self.points[:, None, :] - self.points[None, :, :]
        return float(np.max(np.hypot(diffs[..., 0], diffs[..., 1])))

    @property
    def n_sides(self) -> int:
        return len(self.vertices)

    def is_convex(self) -> bool:
        e = self.edges
        nxt = np.roll(e, -1, axis=0)
        cross = e[:, 0] * nxt[:, 1] - e[:, 1] * nxt[:, 0]
        if np.any(cross <= _CONVEXITY_TOL * self.lengths * np.roll(self.lengths, -1)):
            return False
        # giro total de exactamente una vuelta: descarta polígonos que se cruzan
        turns = np.arctan2(cross, np.einsum("ij,ij->i", e, nxt))
        return bool(abs(np.sum(turns) - 2 * math.pi) < 1e-6)

    def side_index(self, label: str) -> int:
        try:
            return self.side_labels.index(str(label))
        except ValueError:
            raise GeometryError(f"El polígono no tiene un lado '{label}'") from None

    def interior_angles(self) -> np.ndarray:
        """Ángulo interior en cada vértice k (entre los lados k-1 y k)."""
        turn = np.mod(self.directions - np.roll(self.directions, 1), 2 * math.pi)
        return math.pi - turn

    def vertex_labels(self, k: int) -> tuple[str, str]:
        """Etiquetas de los dos lados que se encuentran en el vértice k."""
        n = self.n_sides
        return self.side_labels[(k - 1) % n], self.side_labels[k % n]

    def point_on_side(self, side: int, s: float) -> np.ndarray:
        return self.points[side] + s * self.tangents[side]

    def signed_distances(self, point) -> np.ndarray:
        """Distancia (positiva hacia dentro) del punto a la recta de cada lado."""
        return self.normals @ np.asarray(point, dtype=float) - self.offsets

    def contains(self, point, tol: float = 0.0) -> bool:
        return bool(np.all(self.signed_distances(point) >= -tol))

    def with_vertices(self, points, **changes) -> "OralPolygon":
        pts = tuple((float(x), float(y)) for x, y in points)
        return replace(self, vertices=pts, **changes)


# ---------- ARCHIVO DE CONFIGURACIÓN ----------
def polygon_from_config(cfg: PolygonConfig) -> OralPolygon:
    """
    Construye el polígono descrito por un archivo de configuración. Los campos de
    articuladores del archivo describen la pose ya aplicada a los vértices.
    """
    return OralPolygon(
        vertices=tuple((float(x), float(y)) for x, y in cfg.vertices),
        side_labels=tuple(cfg.side_labels),
        labial_corner=cfg.labial_corner,
        jaw_drop=cfg.jaw_drop,
        jaw_hinge=cfg.jaw_hinge,
        velum_hinge=cfg.velum_hinge,
        velum_closed=cfg.velum_closed,
        scale=cfg.scale,
        name=cfg.name,
    )


def polygon_to_config(p: OralPolygon) -> PolygonConfig:
    return PolygonConfig(
        vertices=[list(v) for v in p.vertices],
        side_labels=list(p.side_labels),
        labial_corner=p.labial_corner,
        jaw_drop=p.jaw_drop,
        jaw_hinge=p.jaw_hinge,
        velum_hinge=p.velum_hinge,
        velum_closed=p.velum_closed,
        scale=p.scale,
        name=p.name,
    )


def load_polygon(path: str | Path) -> OralPolygon:
    """
    Lee un archivo JSON de polígono.

    Raises:
        ConfigError: Si el archivo no existe o no valida.
        GeometryError: Si los vértices no forman un polígono convexo.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        cfg = PolygonConfig.model_validate(raw)
    except FileNotFoundError:
        raise ConfigError(f"No existe el archivo de polígono {path}") from None
    except (json.JSONDecodeError, ValidationError) as exc:
        raise ConfigError(f"Archivo de polígono inválido {path}: {exc}") from exc
    return polygon_from_config(cfg)


def save_polygon(p: OralPolygon, path: str | Path) -> None:
    data = polygon_to_config(p).model_dump(exclude_none=True)
    Path(path).write_text(json.dumps(data, ensure_ascii=False, indent=2), encoding="utf-8")


# ---------- OPERACIONES ----------
def build_default_polygon(scale: float = config.DEFAULT_SCALE) -> OralPolygon:
    """
    Devuelve el hexágono oral canónico con la mandíbula de longitud `scale`.

    Las coordenadas viven en el archivo versionado del directorio de datos,
    fijadas para una mandíbula de 8 cm.

    Args:
        scale (float): Longitud de la mandíbula en cm, entre 6 y 10.

    Returns:
        OralPolygon: Hexágono con lados ʔ, χ, x, xⁱ, ç, θ y esquina ϕ.

    Raises:
        GeometryError: Si la escala está fuera de rango.
    """
    if not config.MIN_SCALE <= scale <= config.MAX_SCALE:
        raise GeometryError(
            f"Escala {scale} fuera del rango [{config.MIN_SCALE}, {config.MAX_SCALE}] cm"
        )
    base = load_polygon(config.data_path(config.DEFAULT_POLYGON_FILE))
    factor = scale / base.scale
    p = rescale(base, factor) if factor != 1.0 else base
    return replace(p, scale=float(scale), name="oral-default")


def rescale(p: OralPolygon, lam: float) -> OralPolygon:
    """Multiplica todos los vértices por λ respecto al origen."""
    if lam <= 0:
        raise GeometryError("El factor de escala debe ser positivo")
    if lam == 1.0:
        return p
    return p.with_vertices(
        [(x * lam, y * lam) for x, y in p.vertices],
        jaw_drop=p.jaw_drop * lam,
        scale=None if p.scale is None else p.scale * lam,
    )


def erode(p: OralPolygon, radius: float) -> OralPolygon:
    """
    Polígono desplazado hacia dentro: cada lado se traslada `radius` a lo largo de
    su normal y se vuelve a intersecar con sus vecinos.

    El centro de una bola de radio `radius` en `p` recorre el billar puntual del
    polígono erosionado.

    Raises:
        GeometryError: Si algún lado desaparece o queda casi degenerado.
    """
    if radius < 0:
        raise GeometryError("El radio no puede ser negativo")
    if radius == 0:
        return p
    n_prev = np.roll(p.normals, 1, axis=0)
    n_cur = p.normals
    denom = 1.0 + np.einsum("ij,ij->i", n_prev, n_cur)
    moved = p.points + radius * (n_prev + n_cur) / denom[:, None]
    new_edges = np.roll(moved, -1, axis=0) - moved
    along = np.einsum("ij,ij->i", new_edges, p.tangents)
    if np.any(along < config.MIN_ERODED_SIDE_RATIO * p.lengths):
        raise GeometryError(f"Radio {radius} demasiado grande: la erosión degenera el polígono")
    try:
        return p.with_vertices(moved)
    except GeometryError as exc:
        raise GeometryError(f"Radio {radius} demasiado grande: {exc}") from exc


def _clip(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Recorta un polígono convexo con el semiplano normal·x >= offset."""
    out = []
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        da, db = normal @ a - offset, normal @ b - offset
        if da >= 0:
            out.append(a)
        if (da >= 0) != (db >= 0):
            out.append(a + (b - a) * (da / (da - db)))
    return np.array(out) if out else np.empty((0, 2))


def inradius(p: OralPolygon) -> float:
    """
    Radio del mayor círculo inscrito, por bisección sobre la factibilidad de los
    semiplanos desplazados.
    """
    lo, hi = 0.0, p.diameter
    box = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]) * 4 * p.diameter
    box = box + p.points.mean(axis=0)
    for _ in range(80):
        r = 0.5 * (lo + hi)
        region = box
        for normal, offset in zip(p.normals, p.offsets):
            region = _clip(region, normal, offset + r)
            if len(region) == 0:
                break
        if len(region):
            lo = r
        else:
            hi = r
    return lo


def apply_articulators(
    p: OralPolygon,
    jaw_drop: float = 0.0,
    jaw_hinge: float = 0.0,
    velum_hinge: float = 0.0,
    velum_closed: bool = False,
) -> OralPolygon:
    """
    Mueve la mandíbula y el velo.

    La mandíbula (lado ʔ) baja `jaw_drop` cm y gira `jaw_hinge` rad en sentido
    antihorario alrededor de su vértice posterior (esquina ʔ/χ), de modo que el
    extremo labial desciende. El lado x gira `velum_hinge` rad en sentido horario
    alrededor de su vértice anterior (esquina x/xⁱ). Con `velum_closed` el vértice
    x/xⁱ desaparece y el lado fusionado conserva la etiqueta x.

    Args:
        p (OralPolygon): Polígono de partida.
        jaw_drop (float): Descenso adicional de la mandíbula (cm, >= 0).
        jaw_hinge (float): Giro adicional de la mandíbula (rad, >= 0).
        velum_hinge (float): Giro adicional del velo (rad, >= 0).
        velum_closed (bool): Cerrar el velo.

    Returns:
        OralPolygon: Polígono articulado; los campos acumulan los movimientos.

    Raises:
        GeometryError: Si el resultado no es convexo o falta el lado requerido,
            o si en un polígono a escala la mandíbula sale del rango de longitudes.
    """
    if min(jaw_drop, jaw_hinge, velum_hinge) < 0:
        raise GeometryError("Los parámetros de articulación no pueden ser negativos")
    pts = p.points.copy()
    n = p.n_sides

    if jaw_drop or jaw_hinge:
        j = p.side_index(SideLabel.GLOTTAL)
        prev_side, next_side = (j - 1) % n, (j + 1) % n
        shift = np.array([0.0, -jaw_drop])
        hinge = line_intersection(
            pts[j] + shift, p.tangents[j], pts[next_side], p.tangents[next_side]
        )
        jaw_dir = _rotate(p.tangents[j], jaw_hinge)
        front = line_intersection(hinge, jaw_dir, pts[prev_side], p.tangents[prev_side])
        pts[j], pts[next_side] = front, hinge
        jaw_length = float(np.hypot(*(hinge - front)))
        if p.scale is not None and not config.MIN_SCALE <= jaw_length <= config.MAX_SCALE:
            raise GeometryError(
                f"La mandíbula articulada mide {jaw_length:.4g} cm, fuera de [{config.MIN_SCALE}, {config.MAX_SCALE}]"
            )

    if velum_hinge:
        if p.velum_closed:
            raise GeometryError("El velo está cerrado: no puede girarse")
        k = p.side_index(SideLabel.VELAR)
        hinge = pts[(k + 1) % n]
        velum_dir = _rotate(p.tangents[k], -velum_hinge)
        prev_side = (k - 1) % n
        pts[k] = line_intersection(hinge, velum_dir, pts[prev_side], pts[k] - pts[prev_side])

    labels = list(p.side_labels)
    labial = p.labial_corner
    closing = velum_closed and not p.velum_closed
    if closing:
        k = p.side_index(SideLabel.VELAR)
        drop = (k + 1) % n
        if labels[drop] != SideLabel.VELAR_PALATAL.value:
            raise GeometryError("El lado xⁱ debe seguir al lado x para cerrar el velo")
        pts = np.delete(pts, drop, axis=0)
        del labels[drop]
        if labial is not None and labial > drop:
            labial -= 1

    try:
        result = replace(
            p,
            vertices=tuple((float(x), float(y)) for x, y in pts),
            side_labels=tuple(labels),
            labial_corner=labial,
            jaw_drop=p.jaw_drop + jaw_drop,
            jaw_hinge=p.jaw_hinge + jaw_hinge,
            velum_hinge=p.velum_hinge + velum_hinge,
            velum_closed=p.velum_closed or velum_closed,
        )
    except GeometryError as exc:
        raise GeometryError(f"La articulación produce un polígono inválido: {exc}") from exc
    _logger.debug(
        "Articuladores aplicados a %s: drop=%s hinge=%s velum=%s closed=%s",
        p.name, jaw_drop, jaw_hinge, velum_hinge, velum_closed,
    )
    return result


def corner_angle(p: OralPolygon, label_i: str, label_j: str) -> float:
    """
    Ángulo interior de la esquina (real o virtual) que se forma al pasar, en
    sentido antihorario, del lado i al lado j: π − ((dir_j − dir_i) mod 2π).
    Es negativo cuando las rectas divergen.
    """
    di = p.directions[p.side_index(label_i)]
    dj = p.directions[p.side_index(label_j)]
    return math.pi - float(np.mod(dj - di, 2 * math.pi))


def near_parallel_pairs(p: OralPolygon, tol: float) -> list[tuple[str, str]]:
    """Pares de lados cuyas rectas son paralelas dentro de `tol` rad."""
    pairs = []
    for i, j in combinations(range(p.n_sides), 2):
        gap = float(np.mod(p.directions[j] - p.directions[i], 2 * math.pi))
        if abs(gap - math.pi) < tol:
            pairs.append((p.side_labels[i], p.side_labels[j]))
    return pairs


def side_triangle(p: OralPolygon, labels) -> OralPolygon:
    """
    Triángulo acotado por las rectas de tres lados del polígono, con sus etiquetas.

    Raises:
        GeometryError: Si las tres rectas no encierran un triángulo.
    """
    idx = sorted({p.side_index(l) for l in labels}, key=lambda i: p.directions[i])
    if len(idx) != 3:
        raise GeometryError("Se necesitan tres lados distintos")
    corners = []
    for a in range(3):
        prev, cur = idx[a - 1], idx[a]
        corners.append(line_intersection(p.points[prev], p.tangents[prev], p.points[cur], p.tangents[cur]))
    return OralPolygon.from_points(
        corners,
        [p.side_labels[i] for i in idx],
        name=f"{p.name}:{''.join(p.side_labels[i] for i in idx)}",
    )
