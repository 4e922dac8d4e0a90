"""
Órbitas periódicas: construcciones (Fagnano, desplazada, rectangular), cuña,
búsqueda por recurrencia y clasificación de transiciones entre lados.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

import config
from dynamics import BallState, Termination, default_eps_corner, reflect, simulate
from exception import GeometryError, OrbitError
from geometry import OralPolygon, SideLabel, apply_articulators, side_triangle

_logger = logging.getLogger(__name__)

_CAPTURE_S = 0.1
_CAPTURE_ANGLE = 0.1
_NEWTON_STEPS = 25
_CORNER_MARGIN_REL = 1e-3


@dataclass(frozen=True)
class Anchor:
    """Punto del espacio de fases: lado, abscisa s (cm) y ángulo de salida respecto a la tangente."""
    side: int
    s: float
    angle: float


@dataclass(frozen=True)
class PeriodicOrbit:
    polygon: OralPolygon
    period: int
    word: tuple[str, ...]
    anchor: Anchor
    closure_error: float

    def initial_state(self, speed: float = 1.0) -> BallState:
        return BallState.on_side(self.polygon, self.anchor.side, self.anchor.s, self.anchor.angle, speed)

    @property
    def canonical_word(self) -> tuple[str, ...]:
        return canonical_cyclic(self.word)

    def to_dict(self) -> dict:
        return {
            "word": list(self.word),
            "period": self.period,
            "anchor": {"side": self.anchor.side, "s": self.anchor.s, "angle": self.anchor.angle},
            "closure_error": self.closure_error,
        }


class TransitionKind(str, Enum):
    SKIP_STABLE = "skip_stable"
    ADJACENT_GLANCING = "adjacent_glancing"
    JAW_MEDIATED = "jaw_mediated"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class TransitionClass:
    pair: tuple[str, str]
    kind: TransitionKind


@dataclass(frozen=True)
class PhaseGrid:
    """Rejilla de arranques: n_s abscisas por lado y n_angles ángulos en (0, π)."""
    n_s: int = 24
    n_angles: int = 36
    sides: tuple[str, ...] | None = None

    def starts(self, p: OralPolygon) -> list[tuple[int, float, float]]:
        if self.n_s < 1 or self.n_angles < 1:
            raise OrbitError("La rejilla de búsqueda está vacía")
        sides = range(p.n_sides) if self.sides is None else [p.side_index(l) for l in self.sides]
        return [
            (i, float(p.lengths[i]) * (j + 0.5) / self.n_s, math.pi * (k + 0.5) / self.n_angles)
            for i in sides
            for j in range(self.n_s)
            for k in range(self.n_angles)
        ]


# ---------- PALABRAS CÍCLICAS ----------
def canonical_cyclic(word) -> tuple[str, ...]:
    """Mínimo lexicográfico entre las rotaciones de la palabra y de su reversa."""
    word = tuple(word)
    if not word:
        return word
    variants = []
    for w in (word, word[::-1]):
        variants.extend(w[i:] + w[:i] for i in range(len(w)))
    return min(variants)


def contains_cyclic(word, pattern) -> bool:
    """¿Aparece `pattern` como subpalabra de la palabra cíclica, en algún sentido?"""
    word, pattern = tuple(word), tuple(pattern)
    if not word:
        return not pattern
    reps = len(pattern) // len(word) + 2
    for w in (word, word[::-1]):
        long = w * reps
        for i in range(len(w)):
            if long[i:i + len(pattern)] == pattern:
                return True
    return False


def same_cyclic_family(a, b) -> bool:
    return canonical_cyclic(a) == canonical_cyclic(b)


# ---------- SIMULACIÓN DESDE UN ANCLA ----------
def _departure_angle(p: OralPolygon, side: int, direction) -> float:
    d = np.asarray(direction)
    return math.atan2(float(d @ p.normals[side]), float(d @ p.tangents[side]))


def _run_from(p: OralPolygon, anchor: Anchor, events: int, eps_corner: float):
    return simulate(p, BallState.on_side(p, anchor.side, anchor.s, anchor.angle), max_events=events, eps_corner=eps_corner)


def _word_from_anchor(p: OralPolygon, anchor: Anchor, traj, period: int) -> tuple[str, ...]:
    return (p.side_labels[anchor.side],) + tuple(e.side for e in traj.events[: period - 1])


def closure_error(p: OralPolygon, anchor: Anchor, period: int, periods: int = 1, eps_corner: float | None = None):
    """
    Re-simula `periods` períodos desde el ancla.

    Returns:
        tuple[float, tuple]: Máxima distancia al ancla al cierre de cada período y
        la palabra completa recorrida; distancia infinita si el lado o la
        dirección de retorno no coinciden o la trayectoria toca una esquina.
    """
    eps = default_eps_corner(p) if eps_corner is None else eps_corner
    traj = _run_from(p, anchor, period * periods, eps)
    word = tuple(e.side for e in traj.events)
    if traj.termination is not Termination.MAX_EVENTS:
        return math.inf, word
    start = p.point_on_side(anchor.side, anchor.s)
    worst = 0.0
    for k in range(1, periods + 1):
        e = traj.events[k * period - 1]
        if e.side_index != anchor.side:
            return math.inf, word
        angle_gap = abs(_departure_angle(p, anchor.side, e.outgoing_dir) - anchor.angle)
        worst = max(worst, float(np.hypot(*(np.asarray(e.point) - start))), angle_gap * p.diameter)
    return worst, word


# ---------- CONSTRUCCIONES ----------
def fagnano_orbit(triangle: OralPolygon, eps_angle: float = config.EPS_ANGLE) -> PeriodicOrbit:
    """
    Órbita de período 3 por los pies de las alturas (triángulo órtico).

    Args:
        triangle (OralPolygon): Triángulo acutángulo etiquetado.
        eps_angle (float): Margen respecto a π/2 para considerar agudo un ángulo.

    Returns:
        PeriodicOrbit: Ancla en el pie sobre el lado 0, palabra (lado0, lado1, lado2).

    Raises:
        OrbitError: Si el triángulo no es acutángulo o la ley de reflexión falla.
    """
    if triangle.n_sides != 3:
        raise OrbitError("La órbita de Fagnano requiere un triángulo")
    if np.any(triangle.interior_angles() >= math.pi / 2 - eps_angle):
        raise OrbitError("El triángulo no es acutángulo")
    feet, s_feet = [], []
    for i in range(3):
        opposite = triangle.points[(i + 2) % 3]
        s = float((opposite - triangle.points[i]) @ triangle.tangents[i])
        s_feet.append(s)
        feet.append(triangle.point_on_side(i, s))
    for i in range(3):
        d_in = feet[i] - feet[i - 1]
        d_out = feet[(i + 1) % 3] - feet[i]
        d_in, d_out = d_in / np.hypot(*d_in), d_out / np.hypot(*d_out)
        r = reflect(d_in, triangle.normals[i])
        if math.acos(max(-1.0, min(1.0, float(r @ d_out)))) > 1e-9:
            raise OrbitError("La ley de reflexión no se cumple en el pie de la altura")
    first = feet[1] - feet[0]
    anchor = Anchor(0, s_feet[0], _departure_angle(triangle, 0, first / np.hypot(*first)))
    error, _ = closure_error(triangle, anchor, 3)
    if not math.isfinite(error):
        raise OrbitError("La órbita órtica no cierra")
    return PeriodicOrbit(triangle, 3, tuple(triangle.side_labels), anchor, error)


def displaced_fagnano(orbit: PeriodicOrbit, delta: float, periods: int = 50) -> PeriodicOrbit:
    """
    Traslada el ancla `delta` cm a lo largo de su lado manteniendo la dirección.

    Raises:
        OrbitError: Si la órbita desplazada cambia de palabra o toca una esquina.
    """
    if delta == 0:
        return orbit
    p = orbit.polygon
    side = orbit.anchor.side
    s = orbit.anchor.s + delta
    eps = default_eps_corner(p)
    if not eps < s < float(p.lengths[side]) - eps:
        raise OrbitError(f"Desplazamiento {delta} fuera del lado")
    anchor = Anchor(side, s, orbit.anchor.angle)
    tol = 10 * config.RECURRENCE_TOL_REL * p.diameter
    for period in (orbit.period, 2 * orbit.period):
        error, word = closure_error(p, anchor, period, max(1, periods * orbit.period // period))
        expected = (orbit.word[1:] + orbit.word[:1]) * (len(word) // orbit.period + 1)
        if word != expected[: len(word)]:
            raise OrbitError(f"Desplazamiento {delta} fuera de la banda: la palabra cambia")
        if error < tol:
            return PeriodicOrbit(p, period, orbit.word * (period // orbit.period), anchor, error)
    raise OrbitError(f"Desplazamiento {delta}: la órbita no cierra")


def rectangular_orbit(right_triangle: OralPolygon, eps_angle: float = 1e-7, n_grid: int = 400) -> PeriodicOrbit:
    """
    Órbita lanzada perpendicularmente desde la hipotenusa: rebota en ambos catetos,
    vuelve perpendicular a la hipotenusa y desanda el camino (período 6).

    La búsqueda recorre el pie s sobre la hipotenusa; las órbitas cierran en todo
    un intervalo y se toma el punto medio del intervalo válido más largo.

    Raises:
        OrbitError: Sin ángulo recto, o si ningún pie cierra la órbita.
    """
    tri = right_triangle
    if tri.n_sides != 3:
        raise OrbitError("Se requiere un triángulo")
    angles = tri.interior_angles()
    right = [k for k in range(3) if abs(angles[k] - math.pi / 2) < eps_angle]
    if not right:
        raise OrbitError("El triángulo no tiene ángulo recto")
    hyp = (right[0] + 1) % 3
    length = float(tri.lengths[hyp])
    tol = 1e-9 * max(1.0, tri.diameter)

    valid = []
    for j in range(1, n_grid):
        anchor = Anchor(hyp, length * j / n_grid, math.pi / 2)
        error, word = closure_error(tri, anchor, 6)
        ok = (
            error < tol
            and len(word) == 6
            and word[2] == word[5] == tri.side_labels[hyp]
            and word[0] == word[4] != word[1] == word[3]
        )
        valid.append(ok)

    best, run_start = None, None
    for j, ok in enumerate(valid + [False]):
        if ok and run_start is None:
            run_start = j
        elif not ok and run_start is not None:
            if best is None or j - run_start > best[1] - best[0]:
                best = (run_start, j)
            run_start = None
    if best is None:
        raise OrbitError("La búsqueda de la órbita rectangular no cierra")
    mid = 0.5 * ((best[0] + 1) + best[1]) * length / n_grid
    anchor = Anchor(hyp, mid, math.pi / 2)
    error, word = closure_error(tri, anchor, 6)
    if error >= tol:
        raise OrbitError("La órbita rectangular no alcanza la tolerancia de cierre")
    return PeriodicOrbit(tri, 6, (tri.side_labels[hyp],) + word[:5], anchor, error)


def _square_corner(tri: OralPolygon, k: int) -> OralPolygon:
    """Lleva el vértice k al círculo cuyo diámetro es el lado opuesto: ángulo recto exacto."""
    pts = tri.points.copy()
    a, b = pts[(k + 1) % 3], pts[(k + 2) % 3]
    mid, radius = 0.5 * (a + b), 0.5 * float(np.hypot(*(b - a)))
    offset = pts[k] - mid
    pts[k] = mid + radius * offset / float(np.hypot(*offset))
    return tri.with_vertices(pts)


def right_angle_orbit(
    p: OralPolygon,
    labels=(SideLabel.DENTAL.value, SideLabel.GLOTTAL.value, SideLabel.VELAR.value),
    eps_angle: float = 1e-4,
) -> PeriodicOrbit:
    """
    Órbita rectangular del triángulo de lados cuya esquina es casi recta.

    En el hexágono canónico θ y x se cortan a unos 90°: la órbita sale
    perpendicular a la hipotenusa ʔ, rebota en θ y x y desanda el camino. La
    esquina se ajusta al ángulo recto exacto antes de construir la órbita.

    Raises:
        OrbitError: Si ninguna esquina está a menos de `eps_angle` de π/2.
    """
    tri = side_triangle(p, labels)
    gaps = np.abs(tri.interior_angles() - math.pi / 2)
    k = int(np.argmin(gaps))
    if gaps[k] >= eps_angle:
        raise OrbitError(f"El triángulo {tri.name} no tiene una esquina casi recta")
    return rectangular_orbit(_square_corner(tri, k), eps_angle=1e-9)


@dataclass(frozen=True)
class VelumMorph:
    hinge: float
    before: PeriodicOrbit
    after: PeriodicOrbit

    def to_dict(self) -> dict:
        return {"hinge": self.hinge, "before": self.before.to_dict(), "after": self.after.to_dict()}


def velum_morph(
    p: OralPolygon,
    hinge: float,
    labels=(SideLabel.DENTAL.value, SideLabel.GLOTTAL.value, SideLabel.VELAR.value),
) -> VelumMorph:
    """
    Al bajar el velo, la esquina θ/x se cierra por debajo de 90° y la órbita
    rectangular del triángulo θ ʔ x pasa a ser su órbita de Fagnano.

    Args:
        p (OralPolygon): Polígono con el velo abierto.
        hinge (float): Giro del velo en rad, positivo.
        labels: Lados del triángulo; debe incluir x.

    Raises:
        OrbitError: Si el giro no es positivo o el triángulo girado no es acutángulo.
    """
    if hinge <= 0:
        raise OrbitError("El giro del velo debe ser positivo")
    if SideLabel.VELAR.value not in labels:
        raise OrbitError("El triángulo debe incluir el lado x")
    before = right_angle_orbit(p, labels)
    hinged = apply_articulators(p, velum_hinge=hinge)
    after = fagnano_orbit(side_triangle(hinged, labels))
    _logger.info(
        "Velo a %.4f rad: %s (período %d) pasa a %s (período %d)",
        hinge, " ".join(before.canonical_word), before.period, " ".join(after.canonical_word), after.period,
    )
    return VelumMorph(hinge, before, after)


def jaw_slide(orbit: PeriodicOrbit, delta: float, steps: int = 4) -> list[PeriodicOrbit]:
    """
    Desliza el pie de la órbita a lo largo de la mandíbula ʔ en `steps` pasos
    hasta `delta` cm; la dirección se conserva. Es la lectura de un diptongo.

    Raises:
        OrbitError: Si el ancla no está sobre ʔ o el deslizamiento sale de la familia.
    """
    if orbit.polygon.side_labels[orbit.anchor.side] != SideLabel.GLOTTAL.value:
        raise OrbitError("El deslizamiento requiere un ancla sobre la mandíbula ʔ")
    if steps < 1:
        raise OrbitError("Se necesita al menos un paso")
    return [orbit] + [displaced_fagnano(orbit, delta * j / steps) for j in range(1, steps + 1)]


def wedge_polygon(alpha: float, mouth: float) -> OralPolygon:
    """Cuña delgada: vértice en el origen, lados a (eje x) y b (ángulo α), cerrada por la boca."""
    return OralPolygon.from_points(
        [(0.0, 0.0), (mouth, 0.0), (mouth * math.cos(alpha), mouth * math.sin(alpha))],
        ["a", "mouth", "b"],
        name=f"wedge-{alpha:.6f}",
    )


def wedge_entry(alpha: float, height: float, x0: float = 1.0) -> BallState:
    """
    Entrada paralela al lado a, a altura `height` sobre él, dirigida al vértice.

    Desplegada, la trayectoria es la recta y = height: el k-ésimo choque cae a
    distancia height / sin(kα) del vértice y la máxima aproximación es `height`.
    """
    if not 0 < height < x0 * math.tan(alpha):
        raise OrbitError("La entrada debe quedar dentro de la cuña")
    return BallState((x0, height), (-1.0, 0.0))


def wedge_trajectory(
    alpha: float,
    entry: BallState,
    eps_corner: float | None = None,
    mouth_factor: float = 1000.0,
):
    """
    Trayectoria en el triángulo delgado cerrado por la boca, hasta tocar el vértice.

    Raises:
        OrbitError: Si α no está en (0, π/2), la entrada se aleja del vértice o la
            trayectoria no termina en la esquina.
    """
    if not 0 < alpha < math.pi / 2:
        raise OrbitError("El ángulo de la cuña debe estar en (0, π/2)")
    pos = np.asarray(entry.position, dtype=float)
    r = float(np.hypot(*pos))
    if r == 0:
        raise OrbitError("La entrada no puede estar en el vértice")
    if float(np.asarray(entry.direction) @ pos) / r > 1e-12:
        raise OrbitError("La entrada se aleja de la esquina")
    wedge = wedge_polygon(alpha, mouth_factor * r)
    bound = math.ceil(math.pi / alpha) + 3
    traj = simulate(wedge, entry, max_events=bound, eps_corner=eps_corner)
    if traj.termination is not Termination.CORNER_HIT or traj.corner.vertex != 0:
        raise OrbitError(
            f"La trayectoria en la cuña α={alpha:.6f} no alcanza el vértice ({traj.termination.value})"
        )
    return traj


def wedge_bounce_count(
    alpha: float,
    entry: BallState,
    eps_corner: float | None = None,
    mouth_factor: float = 1000.0,
) -> int:
    """Número de choques contra los lados a y b antes de tocar el vértice de la cuña."""
    traj = wedge_trajectory(alpha, entry, eps_corner, mouth_factor)
    return sum(1 for e in traj.events if e.side in ("a", "b"))


# ---------- BÚSQUEDA ----------
def _refine(p: OralPolygon, side: int, s: float, angle: float, period: int, eps: float):
    """Gauss-Newton sobre P^q(s, φ) − (s, φ) con la palabra fija."""
    length = float(p.lengths[side])
    scale = np.array([p.diameter, 1.0])

    def residual(x):
        if not eps < x[0] < length - eps or not 0 < x[1] < math.pi:
            return None, None
        traj = _run_from(p, Anchor(side, float(x[0]), float(x[1])), period, eps)
        if traj.termination is not Termination.MAX_EVENTS or traj.events[-1].side_index != side:
            return None, None
        last = traj.events[-1]
        r = np.array([last.s - x[0], _departure_angle(p, side, last.outgoing_dir) - x[1]])
        return r, tuple(e.side for e in traj.events)

    x = np.array([s, angle])
    r, word = residual(x)
    if r is None:
        return None
    for _ in range(_NEWTON_STEPS):
        if np.all(np.abs(r / scale) < 1e-13):
            break
        jac = np.empty((2, 2))
        for c in range(2):
            h = 1e-7 * (length if c == 0 else 1.0)
            xp, xm = x.copy(), x.copy()
            xp[c] += h
            xm[c] -= h
            rp, wp = residual(xp)
            rm, wm = residual(xm)
            if rp is None or rm is None or wp != word or wm != word:
                return None
            jac[:, c] = (rp - rm) / (2 * h)
        step = np.linalg.lstsq(jac, -r, rcond=1e-10)[0]
        x_new = x + step
        r_new, w_new = residual(x_new)
        if r_new is None or w_new != word:
            return None
        x, r = x_new, r_new
    return Anchor(side, float(x[0]), float(x[1]))


def _contacts(p: OralPolygon, anchor: Anchor, period: int, eps: float):
    traj = _run_from(p, anchor, period, eps)
    return [(e.side_index, e.s, _departure_angle(p, e.side_index, e.outgoing_dir)) for e in traj.events]


def _search_starts(p: OralPolygon, starts, period_max: int, tol: float, eps: float) -> list[PeriodicOrbit]:
    found = []
    for side, s, angle in starts:
        traj = _run_from(p, Anchor(side, s, angle), period_max, eps)
        for q, e in enumerate(traj.events, start=1):
            if q < 2 or e.side_index != side:
                continue
            ds = abs(e.s - s) / p.diameter
            da = abs(_departure_angle(p, side, e.outgoing_dir) - angle)
            if ds > _CAPTURE_S or da > _CAPTURE_ANGLE:
                continue
            anchor = _refine(p, side, s, angle, q, eps)
            if anchor is None:
                continue
            error, word = closure_error(p, anchor, q, eps_corner=eps)
            if error < tol:
                found.append(PeriodicOrbit(p, q, (p.side_labels[side],) + word[: q - 1], anchor, error))
                break
    return found


def _fagnano_seeds(p: OralPolygon) -> list[tuple[int, float, float]]:
    """Arranques en los pies de las alturas de cada triángulo de lados acutángulo."""
    seeds = []
    for trio in combinations(p.side_labels, 3):
        try:
            tri = side_triangle(p, trio)
            orbit = fagnano_orbit(tri)
        except (GeometryError, OrbitError):
            continue
        start = tri.point_on_side(orbit.anchor.side, orbit.anchor.s)
        side = p.side_index(tri.side_labels[orbit.anchor.side])
        s = float((start - p.points[side]) @ p.tangents[side])
        if 0 < s < p.lengths[side]:
            d = orbit.initial_state().direction
            seeds.append((side, s, _departure_angle(p, side, d)))
    return seeds


def find_periodic(
    p: OralPolygon,
    grid: PhaseGrid = PhaseGrid(),
    period_max: int = 10,
    tol_rel: float = config.RECURRENCE_TOL_REL,
    eps_corner: float | None = None,
    workers: int = 1,
) -> list[PeriodicOrbit]:
    """
    Búsqueda de órbitas periódicas por recurrencia.

    Cada arranque de la rejilla (más los pies de Fagnano de cada triángulo de lados)
    se simula `period_max` choques; cuando un choque vuelve al lado de partida cerca
    del punto de fase inicial, el punto fijo se refina por Gauss-Newton con la
    palabra fija y se verifica re-simulando. Las órbitas se deduplican por palabra
    cíclica canónica y por los pares (lado, ángulo de contacto) sin sentido de
    recorrido, así una órbita y su inversa cuentan una sola vez; de cada familia
    paralela se conserva el miembro más alejado de las esquinas.

    Args:
        p (OralPolygon): Polígono.
        grid (PhaseGrid): Rejilla de arranques.
        period_max (int): Máximo período buscado.
        tol_rel (float): Tolerancia de cierre relativa al diámetro.
        eps_corner (float | None): Radio de esquina.
        workers (int): Procesos para repartir los arranques.

    Returns:
        list[PeriodicOrbit]: Catálogo ordenado por palabra canónica.
    """
    eps = default_eps_corner(p) if eps_corner is None else eps_corner
    tol = tol_rel * p.diameter
    starts = _fagnano_seeds(p) + grid.starts(p)

    if workers > 1:
        chunks = [starts[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_search_starts, [p] * workers, chunks, [period_max] * workers, [tol] * workers, [eps] * workers)
            candidates = [o for part in parts for o in part]
    else:
        candidates = _search_starts(p, starts, period_max, tol, eps)

    margin_floor = _CORNER_MARGIN_REL * p.diameter
    best: dict = {}
    for orbit in candidates:
        contacts = _contacts(p, orbit.anchor, orbit.period, eps)
        margin = min(min(s, float(p.lengths[i]) - s) for i, s, _ in contacts)
        if margin < margin_floor:
            continue
        # recorrida al revés, cada ángulo de salida θ pasa a π − θ
        folded = sorted({(i, round(min(a, math.pi - a), 6)) for i, _, a in contacts})
        key = (canonical_cyclic(orbit.word), tuple(folded))
        if key not in best or margin > best[key][0]:
            best[key] = (margin, orbit)

    result = [best[k][1] for k in sorted(best)]
    _logger.debug("find_periodic en %s: %d arranques, %d órbitas", p.name, len(starts), len(result))
    return result


# ---------- TRANSICIONES ----------
def classify_transition(p: OralPolygon, side_i: str, side_j: str, via_jaw: bool = False) -> TransitionClass:
    """
    Clasifica un par de lados según cuántos lados intermedios (sin contar ʔ) salta.

    Pares con ʔ son estables; pares que saltan dos o más lados son estables; los
    adyacentes o separados por un lado son rasantes, salvo que un rebote en ʔ
    interpuesto los convierta en mediados por la mandíbula. La esquina ϕ no es un
    lado: sus pares son indefinidos.

    Raises:
        OrbitError: Si ambos lados son el mismo.
    """
    side_i, side_j = str(side_i), str(side_j)
    if side_i == side_j:
        raise OrbitError("Los lados de una transición deben ser distintos")
    pair = tuple(sorted((side_i, side_j)))
    labial = SideLabel.LABIAL.value
    if labial in pair:
        return TransitionClass(pair, TransitionKind.UNDEFINED)
    for label in pair:
        p.side_index(label)
    jaw = SideLabel.GLOTTAL.value
    if jaw in pair:
        return TransitionClass(pair, TransitionKind.SKIP_STABLE)

    labels = list(p.side_labels)
    if jaw in labels:
        j = labels.index(jaw)
        roof = labels[j + 1:] + labels[:j]
        between = abs(roof.index(side_i) - roof.index(side_j)) - 1
    else:
        gap = abs(labels.index(side_i) - labels.index(side_j))
        between = min(gap, len(labels) - gap) - 1

    if between >= 2:
        kind = TransitionKind.SKIP_STABLE
    elif via_jaw:
        kind = TransitionKind.JAW_MEDIATED
    else:
        kind = TransitionKind.ADJACENT_GLANCING
    return TransitionClass(pair, kind)
