"""
Simulación por eventos del billar: vuelos rectos, reflexión especular,
singularidades de esquina y modo forzado (disipación + reforzamiento).
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

import config
from exception import GeometryError, SimulationError
from geometry import OralPolygon, SideLabel, erode

_logger = logging.getLogger(__name__)

_INWARD_MARGIN = 1e-6


class Termination(str, Enum):
    MAX_EVENTS = "max_events"
    CORNER_HIT = "corner_hit"
    ENERGY_FLOOR = "energy_floor"
    ESCAPE_ERROR = "escape_error"


@dataclass(frozen=True)
class BallState:
    """Posición (cm), dirección unitaria y rapidez (cm/s)."""
    position: tuple[float, float]
    direction: tuple[float, float]
    speed: float = 1.0

    def __post_init__(self):
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-12:
            raise SimulationError(f"La dirección debe ser unitaria (|d| = {norm})")
        if self.speed <= 0:
            raise SimulationError("La rapidez debe ser positiva")

    @classmethod
    def from_angle(cls, x: float, y: float, angle: float, speed: float = 1.0) -> "BallState":
        return cls((float(x), float(y)), (math.cos(angle), math.sin(angle)), speed)

    @classmethod
    def on_side(cls, p: OralPolygon, side: int, s: float, angle: float, speed: float = 1.0) -> "BallState":
        """Arranque sobre el lado `side` en la abscisa `s`, con `angle` medido desde la tangente."""
        point = p.point_on_side(side, s)
        t, n = p.tangents[side], p.normals[side]
        d = math.cos(angle) * t + math.sin(angle) * n
        d = d / math.hypot(d[0], d[1])
        return cls((float(point[0]), float(point[1])), (float(d[0]), float(d[1])), speed)


@dataclass(frozen=True)
class BallSpec:
    """Radio de la bola; el calendario cambia el radio sólo en las colisiones."""
    radius: float = 0.0
    radius_schedule: dict[int, float] = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class DriveSpec:
    restitution: float = 1.0
    reforce_speed: float | None = None
    direction_jitter: float = 0.0
    speed_floor: float = 0.0

    def __post_init__(self):
        if not 0 < self.restitution <= 1:
            raise SimulationError("La restitución debe estar en (0, 1]")
        if self.reforce_speed is not None and self.reforce_speed <= 0:
            raise SimulationError("La rapidez de reforzamiento debe ser positiva")
        if self.direction_jitter < 0 or self.speed_floor < 0:
            raise SimulationError("Ruido angular y umbral de energía no pueden ser negativos")

    @property
    def conservative(self) -> bool:
        return self.restitution == 1.0 and self.reforce_speed is None and self.direction_jitter == 0.0


@dataclass(frozen=True)
class CollisionEvent:
    index: int
    side: str
    side_index: int
    s: float
    point: tuple[float, float]
    incoming_dir: tuple[float, float]
    outgoing_dir: tuple[float, float]
    speed_in: float
    speed_out: float
    flight_length: float
    time: float
    grazing: bool = False


@dataclass(frozen=True)
class CornerHit:
    """La trayectoria alcanzó el entorno ε de un vértice."""
    vertex: int
    labels: tuple[str, str]
    point: tuple[float, float]
    distance: float
    flight_length: float
    labial: bool = False

    @property
    def token(self) -> str:
        return SideLabel.LABIAL.value if self.labial else "|".join(self.labels)


@dataclass(frozen=True)
class Trajectory:
    polygon: OralPolygon
    initial: BallState
    events: tuple[CollisionEvent, ...]
    termination: Termination
    corner: CornerHit | None = None
    message: str | None = None

    @property
    def word(self) -> tuple[str, ...]:
        return symbol_word(self)


@dataclass(frozen=True)
class CXCUnit:
    """Colisión, vuelo, colisión."""
    first: str
    flight_length: float
    second: str
    pattern: str
    in_syllable: bool = False


def reflect(d, n) -> np.ndarray:
    """
    Reflexión especular d − 2(d·n)n.

    Args:
        d: Dirección unitaria entrante.
        n: Normal unitaria hacia el interior.

    Raises:
        SimulationError: Si la dirección no se dirige hacia el lado.
    """
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    dn = float(d @ n)
    if dn > 0:
        raise SimulationError("La dirección no incide sobre el lado")
    return d - 2.0 * dn * n


def is_grazing(d, n, eps_graze: float = config.EPS_GRAZE) -> bool:
    return abs(float(np.asarray(d) @ np.asarray(n))) < eps_graze


def default_eps_corner(p: OralPolygon) -> float:
    return config.EPS_CORNER_REL * p.diameter


def advance(
    state: BallState,
    p: OralPolygon,
    eps_corner: float,
    last_side: int | None = None,
    index: int = 0,
    time: float = 0.0,
    eps_graze: float = config.EPS_GRAZE,
) -> CollisionEvent | CornerHit:
    """
    Primer choque del rayo con el borde del polígono convexo.

    La salida del rayo es el mínimo, entre los lados hacia los que se mueve la
    bola, de la distancia al lado dividida por la velocidad de acercamiento.

    Args:
        state (BallState): Estado actual, dentro o sobre el borde.
        p (OralPolygon): Mesa de billar.
        eps_corner (float): Radio (en longitud de arco) de la singularidad de esquina.
        last_side (int | None): Lado del choque anterior, excluido.
        index (int): Ordinal del choque.
        time (float): Tiempo acumulado antes del vuelo.

    Returns:
        CollisionEvent | CornerHit: El choque reflejado o la esquina alcanzada.

    Raises:
        SimulationError: Si ningún lado intercepta el rayo.
    """
    pos = np.asarray(state.position, dtype=float)
    d = np.asarray(state.direction, dtype=float)
    approach = p.normals @ d
    dist = np.maximum(p.normals @ pos - p.offsets, 0.0)
    candidate = approach < 0
    if last_side is not None:
        candidate[last_side] = False
    if not candidate.any():
        raise SimulationError("El rayo no intercepta ningún lado del polígono")
    t = np.full(p.n_sides, np.inf)
    t[candidate] = dist[candidate] / -approach[candidate]
    i = int(np.argmin(t))
    flight = float(t[i])
    hit = pos + flight * d
    length = float(p.lengths[i])
    s = float((hit - p.points[i]) @ p.tangents[i])

    if s < eps_corner or length - s < eps_corner:
        vertex = i if s < eps_corner else (i + 1) % p.n_sides
        corner = p.points[vertex]
        return CornerHit(
            vertex=vertex,
            labels=p.vertex_labels(vertex),
            point=(float(corner[0]), float(corner[1])),
            distance=max(0.0, min(s, length - s)),
            flight_length=flight,
            labial=vertex == p.labial_corner,
        )

    out = reflect(d, p.normals[i])
    return CollisionEvent(
        index=index,
        side=p.side_labels[i],
        side_index=i,
        s=s,
        point=(float(hit[0]), float(hit[1])),
        incoming_dir=(float(d[0]), float(d[1])),
        outgoing_dir=(float(out[0]), float(out[1])),
        speed_in=state.speed,
        speed_out=state.speed,
        flight_length=flight,
        time=time + flight / state.speed,
        grazing=is_grazing(d, p.normals[i], eps_graze),
    )


def _jitter(direction: np.ndarray, tangent: np.ndarray, normal: np.ndarray, delta: float) -> np.ndarray:
    """Gira la dirección `delta` rad manteniéndola estrictamente hacia el interior."""
    angle = math.atan2(float(direction @ normal), float(direction @ tangent)) + delta
    angle = min(max(angle, _INWARD_MARGIN), math.pi - _INWARD_MARGIN)
    return math.cos(angle) * tangent + math.sin(angle) * normal


def simulate_driven(
    p: OralPolygon,
    init: BallState,
    ball: BallSpec = BallSpec(),
    drive: DriveSpec = DriveSpec(),
    max_events: int = 100,
    eps_corner: float | None = None,
    rng_seed: int = 0,
    eps_graze: float = config.EPS_GRAZE,
) -> Trajectory:
    """
    Billar con disipación y reforzamiento en cada choque.

    En cada colisión la rapidez de salida es ρ·v_in, acotada por la rapidez de
    reforzamiento si la hay; tras reflejar, la dirección recibe un ruido uniforme
    en [−jitter, +jitter]. La simulación termina al agotar `max_events`, al tocar
    una esquina, al caer bajo `speed_floor` o ante un fallo numérico.

    Args:
        p (OralPolygon): Polígono original; la bola finita usa su erosión.
        init (BallState): Estado inicial del centro de la bola.
        ball (BallSpec): Radio y calendario de radios.
        drive (DriveSpec): Parámetros del forzamiento.
        max_events (int): Máximo de colisiones.
        eps_corner (float | None): Radio de esquina; por defecto relativo al diámetro.
        rng_seed (int): Semilla del ruido angular.

    Returns:
        Trajectory: Historia de eventos y motivo de terminación.

    Raises:
        SimulationError: Si el estado inicial no está dentro de la mesa.
    """
    eps = default_eps_corner(p) if eps_corner is None else eps_corner
    radius = ball.radius
    try:
        table = erode(p, radius)
    except GeometryError as exc:
        raise SimulationError(str(exc)) from exc
    if not table.contains(init.position, tol=1e-9 * p.diameter):
        raise SimulationError("El estado inicial está fuera del polígono (erosionado)")

    rng = np.random.default_rng(rng_seed)
    state = init
    last_side = None
    elapsed = 0.0
    events: list[CollisionEvent] = []
    termination = Termination.MAX_EVENTS
    corner = None
    message = None

    for index in range(max_events):
        try:
            result = advance(state, table, eps, last_side, index, elapsed, eps_graze)
        except SimulationError as exc:
            termination, message = Termination.ESCAPE_ERROR, str(exc)
            break
        if isinstance(result, CornerHit):
            termination, corner = Termination.CORNER_HIT, result
            break

        event = result
        if not drive.conservative:
            speed_out = drive.restitution * event.speed_in
            if drive.reforce_speed is not None:
                speed_out = min(drive.reforce_speed, speed_out)
            out = np.asarray(event.outgoing_dir)
            if drive.direction_jitter > 0:
                delta = float(rng.uniform(-drive.direction_jitter, drive.direction_jitter))
                out = _jitter(out, table.tangents[event.side_index], table.normals[event.side_index], delta)
            event = replace(event, speed_out=speed_out, outgoing_dir=(float(out[0]), float(out[1])))
        events.append(event)
        elapsed = event.time
        last_side = event.side_index
        position = np.asarray(event.point)

        if index in ball.radius_schedule and ball.radius_schedule[index] != radius:
            new_radius = ball.radius_schedule[index]
            position = position + (new_radius - radius) * table.normals[event.side_index]
            try:
                table = erode(p, new_radius)
            except GeometryError as exc:
                termination, message = Termination.ESCAPE_ERROR, str(exc)
                break
            radius = new_radius
            if not table.contains(position, tol=1e-9 * p.diameter):
                termination, message = Termination.ESCAPE_ERROR, "El cambio de radio expulsa la bola"
                break

        state = BallState((float(position[0]), float(position[1])), event.outgoing_dir, event.speed_out)
        if event.speed_out < drive.speed_floor:
            termination = Termination.ENERGY_FLOOR
            break

    _logger.debug(
        "Simulación en %s: %d eventos, terminación %s", p.name, len(events), termination.value
    )
    return Trajectory(table, init, tuple(events), termination, corner, message)


def simulate(
    p: OralPolygon,
    init: BallState,
    ball: BallSpec = BallSpec(),
    max_events: int = 100,
    eps_corner: float | None = None,
    eps_graze: float = config.EPS_GRAZE,
) -> Trajectory:
    """Billar conservativo: sin disipación, sin ruido, rapidez constante."""
    return simulate_driven(p, init, ball, DriveSpec(), max_events, eps_corner, 0, eps_graze)


def word_length_limit(restitution: float, v0: float, floor: float, max_n: int = 100_000) -> int | None:
    """
    Índice (desde 1) de la colisión tras la cual la rapidez ρⁿ·v0 cae bajo el umbral,
    o None si nunca cae. Repite el producto de la simulación para coincidir bit a bit.
    """
    if restitution >= 1.0 or floor <= 0:
        return None
    speed = v0
    for n in range(1, max_n + 1):
        speed = restitution * speed
        if speed < floor:
            return n
    return None


def symbol_word(t: Trajectory) -> tuple[str, ...]:
    """Etiquetas de los choques en orden; una esquina añade ϕ o el par 'a|b'."""
    word = [e.side for e in t.events]
    if t.corner is not None:
        word.append(t.corner.token)
    return tuple(word)


def cxc_units(t: Trajectory | list[CollisionEvent]) -> list[CXCUnit]:
    """
    Pares consecutivos de choques con su vuelo, marcando C[ʔ], [ʔ]C y los pares C[ʔ]C.

    Raises:
        SimulationError: Con menos de dos choques.
    """
    events = t.events if isinstance(t, Trajectory) else tuple(t)
    if len(events) < 2:
        raise SimulationError("Se necesitan al menos dos colisiones para formar una unidad CXC")
    jaw = SideLabel.GLOTTAL.value
    patterns = []
    for a, b in zip(events, events[1:]):
        if a.side != jaw and b.side == jaw:
            patterns.append("C[ʔ]")
        elif a.side == jaw and b.side != jaw:
            patterns.append("[ʔ]C")
        else:
            patterns.append("CC")
    syllabic = [False] * len(patterns)
    for i in range(len(patterns) - 1):
        if patterns[i] == "C[ʔ]" and patterns[i + 1] == "[ʔ]C":
            syllabic[i] = syllabic[i + 1] = True
    return [
        CXCUnit(a.side, b.flight_length, b.side, pat, syl)
        for a, b, pat, syl in zip(events, events[1:], patterns, syllabic)
    ]


def time_reversed_state(t: Trajectory) -> BallState:
    """Estado que recorre la trayectoria al revés desde el último punto de contacto."""
    if not t.events:
        raise SimulationError("Trayectoria sin colisiones")
    last = t.events[-1]
    d = -np.asarray(last.incoming_dir)
    return BallState(last.point, (float(d[0]), float(d[1])), last.speed_in)


def trajectory_points(t: Trajectory) -> list[tuple[float, float]]:
    points = [t.initial.position] + [e.point for e in t.events]
    if t.corner is not None:
        points.append(t.corner.point)
    return points


# ---------- REGISTRO JSONL ----------
def event_record(e: CollisionEvent) -> dict:
    return {
        "i": e.index,
        "side": e.side,
        "s": e.s,
        "x": e.point[0],
        "y": e.point[1],
        "din": list(e.incoming_dir),
        "dout": list(e.outgoing_dir),
        "vin": e.speed_in,
        "vout": e.speed_out,
        "len": e.flight_length,
    }


def termination_record(t: Trajectory) -> dict:
    record = {"termination": t.termination.value, "events": len(t.events)}
    if t.corner is not None:
        record["corner"] = {
            "label": t.corner.token,
            "vertex": t.corner.vertex,
            "distance": t.corner.distance,
            "x": t.corner.point[0],
            "y": t.corner.point[1],
        }
    if t.message:
        record["message"] = t.message
    return record


def events_to_jsonl(t: Trajectory) -> str:
    lines = [json.dumps(event_record(e), ensure_ascii=False) for e in t.events]
    lines.append(json.dumps(termination_record(t), ensure_ascii=False))
    return "\n".join(lines) + "\n"


def write_event_log(t: Trajectory, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(events_to_jsonl(t), encoding="utf-8")
    return path


def read_event_log(path: str | Path) -> tuple[list[dict], dict]:
    """Lee un registro JSONL: (eventos, registro de terminación)."""
    records = [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not records or "termination" not in records[-1]:
        raise SimulationError(f"Registro de eventos sin línea de terminación: {path}")
    return records[:-1], records[-1]
