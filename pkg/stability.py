"""
Estabilidad simbólica de trayectorias frente a perturbaciones cinemáticas
(condición inicial) y geométricas (forma del polígono).
"""

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from dynamics import BallState, simulate, symbol_word
from exception import GeometryError, SimulationError, StabilityError
from geometry import OralPolygon
from orbits import Anchor

_logger = logging.getLogger(__name__)

_ON_SIDE_TOL_REL = 1e-9


class PerturbationKind(str, Enum):
    KINEMATIC = "kinematic"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class PerturbationSpec:
    """
    Perturbación de un experimento.

    Attributes:
        kind (PerturbationKind): Cinemática o geométrica.
        ds (float): Desplazamiento del arranque en cm (cinemática).
        dtheta (float): Giro de la dirección inicial en rad (cinemática).
        shape (tuple): Vector de forma de dimensión 2p−4 (geométrica): p−1
            incrementos de ángulo interior para los vértices 0..p−2 (el último
            vértice compensa) y p−3 incrementos relativos de longitud para los
            lados 1..p−3.
    """
    kind: PerturbationKind
    ds: float = 0.0
    dtheta: float = 0.0
    shape: tuple[float, ...] = ()

    @classmethod
    def kinematic(cls, ds: float = 0.0, dtheta: float = 0.0) -> "PerturbationSpec":
        return cls(PerturbationKind.KINEMATIC, ds=ds, dtheta=dtheta)

    @classmethod
    def geometric(cls, shape) -> "PerturbationSpec":
        return cls(PerturbationKind.GEOMETRIC, shape=tuple(float(g) for g in shape))

    @classmethod
    def zero(cls) -> "PerturbationSpec":
        return cls(PerturbationKind.KINEMATIC)


@dataclass(frozen=True)
class LadderRow:
    kind: str
    delta: float
    passed: int
    samples: int

    @property
    def pass_rate(self) -> float:
        return self.passed / self.samples if self.samples else 0.0


@dataclass(frozen=True)
class StabilityReport:
    """
    Resultado de `stability_radius`.

    Los radios son el mayor δ de la escalera tal que todas las muestras de ese δ
    y de los anteriores conservan el prefijo; 0.0 si falla el primer δ y None si
    ese tipo de perturbación no se evaluó.
    """
    subject: str
    k: int
    kinematic_radius: float | None
    kinematic_radius_s: float | None
    kinematic_radius_theta: float | None
    geometric_radius: float | None
    samples: int
    failures: tuple[int, ...]
    rows: tuple[LadderRow, ...] = field(default=())
    monotone: bool = True

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "k": self.k,
            "kinematic_radius": self.kinematic_radius,
            "kinematic_radius_s": self.kinematic_radius_s,
            "kinematic_radius_theta": self.kinematic_radius_theta,
            "geometric_radius": self.geometric_radius,
            "samples": self.samples,
            "failures": list(self.failures),
            "monotone": self.monotone,
            "ladder": [
                {"kind": r.kind, "delta": r.delta, "passed": r.passed, "samples": r.samples, "pass_rate": r.pass_rate}
                for r in self.rows
            ],
        }

    def to_csv(self) -> str:
        """Resumen (tipo, δ, tasa de acierto) para graficar."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kind", "delta", "pass_rate"])
        for r in self.rows:
            writer.writerow([r.kind, repr(r.delta), f"{r.pass_rate:.6f}"])
        return buf.getvalue()


# ---------- PERTURBACIÓN GEOMÉTRICA ----------
def shape_dimension(p: OralPolygon) -> int:
    return 2 * p.n_sides - 4


def perturb_polygon(p: OralPolygon, g) -> OralPolygon:
    """
    Aplica incrementos de ángulo interior y de longitud relativa conservando la
    suma de ángulos, el vértice 0, la dirección y la longitud del lado 0 (la
    escala). Las dos últimas longitudes se despejan del cierre del polígono.

    Args:
        p (OralPolygon): Polígono de referencia.
        g: Vector de forma de dimensión 2p−4 (ver PerturbationSpec).

    Returns:
        OralPolygon: Polígono perturbado con las mismas etiquetas.

    Raises:
        GeometryError: Dimensión incorrecta, ángulo fuera de (0, π), longitud no
            positiva o resultado no convexo.
    """
    n = p.n_sides
    g = np.asarray(g, dtype=float)
    if g.shape != (shape_dimension(p),):
        raise GeometryError(f"El vector de forma debe tener dimensión {shape_dimension(p)}")
    if not np.any(g):
        return p

    angle_deltas = np.append(g[: n - 1], -np.sum(g[: n - 1]))
    angles = p.interior_angles() + angle_deltas
    if np.any(angles <= 0) or np.any(angles >= math.pi):
        raise GeometryError("La perturbación lleva un ángulo interior fuera de (0, π)")

    directions = np.empty(n)
    directions[0] = p.directions[0]
    for k in range(1, n):
        directions[k] = directions[k - 1] + (math.pi - angles[k])
    units = np.column_stack([np.cos(directions), np.sin(directions)])

    lengths = np.array(p.lengths, dtype=float)
    lengths[1: n - 2] *= 1.0 + g[n - 1:]
    rest = -(lengths[: n - 2, None] * units[: n - 2]).sum(axis=0)
    system = np.column_stack([units[n - 2], units[n - 1]])
    if abs(np.linalg.det(system)) < 1e-12:
        raise GeometryError("Los dos últimos lados quedan paralelos")
    lengths[n - 2:] = np.linalg.solve(system, rest)
    if np.any(lengths <= 0):
        raise GeometryError("La perturbación produce una longitud de lado no positiva")

    steps = lengths[:, None] * units
    points = p.points[0] + np.vstack([np.zeros(2), np.cumsum(steps[:-1], axis=0)])
    return p.with_vertices(points)


# ---------- CONDICIONES INICIALES ----------
def _as_anchor(p: OralPolygon, init) -> Anchor | None:
    """Ancla del estado si arranca sobre un lado; None si arranca en el interior."""
    if isinstance(init, Anchor):
        return init
    pos = np.asarray(init.position)
    d = np.asarray(init.direction)
    tol = _ON_SIDE_TOL_REL * p.diameter
    for side, dist in enumerate(p.signed_distances(pos)):
        s = float((pos - p.points[side]) @ p.tangents[side])
        if abs(dist) <= tol and 0.0 < s < p.lengths[side] and d @ p.normals[side] > 0:
            angle = math.atan2(float(d @ p.normals[side]), float(d @ p.tangents[side]))
            return Anchor(side, s, angle)
    return None


def _state(p: OralPolygon, init) -> BallState:
    if isinstance(init, Anchor):
        if not 0.0 < init.s < p.lengths[init.side] or not 0.0 < init.angle < math.pi:
            raise StabilityError("El ancla perturbada queda fuera del lado o apunta hacia fuera")
        return BallState.on_side(p, init.side, init.s, init.angle)
    return init


def _kinematic(p: OralPolygon, init, ds: float, dtheta: float):
    anchor = _as_anchor(p, init)
    if anchor is not None:
        return Anchor(anchor.side, anchor.s + ds, anchor.angle + dtheta)
    pos = np.asarray(init.position)
    d = np.asarray(init.direction)
    shifted = pos + ds * np.array([-d[1], d[0]])
    if not p.contains(shifted):
        raise StabilityError("El arranque perturbado queda fuera del polígono")
    angle = math.atan2(d[1], d[0]) + dtheta
    return BallState.from_angle(shifted[0], shifted[1], angle, init.speed)


def _geometric(p: OralPolygon, q: OralPolygon, init):
    anchor = _as_anchor(p, init)
    if anchor is not None:
        s = anchor.s / p.lengths[anchor.side] * q.lengths[anchor.side]
        return Anchor(anchor.side, float(s), anchor.angle)
    if not q.contains(init.position):
        raise StabilityError("El arranque queda fuera del polígono perturbado")
    return init


# ---------- PREFIJOS ----------
def _prefix(p: OralPolygon, init, k: int, eps_corner: float | None) -> tuple[str, ...]:
    traj = simulate(p, _state(p, init), max_events=k, eps_corner=eps_corner)
    return symbol_word(traj)[:k]


def first_divergence(reference, other, k: int) -> int | None:
    """Primera posición (< k) donde difieren los prefijos; None si coinciden."""
    for i in range(k):
        a = reference[i] if i < len(reference) else None
        b = other[i] if i < len(other) else None
        if a != b:
            return i
    return None


def _divergence(p: OralPolygon, init, spec: PerturbationSpec, k: int, eps_corner, reference) -> int | None:
    try:
        if spec.kind is PerturbationKind.GEOMETRIC:
            q = perturb_polygon(p, spec.shape)
            word = _prefix(q, _geometric(p, q, init), k, eps_corner)
        else:
            word = _prefix(p, _kinematic(p, init, spec.ds, spec.dtheta), k, eps_corner)
    except (GeometryError, SimulationError, StabilityError) as exc:
        _logger.debug("Perturbación inválida: %s", exc)
        return 0
    return first_divergence(reference, word, k)


def _reference(p: OralPolygon, init, k: int, eps_corner) -> tuple[str, ...]:
    traj = simulate(p, _state(p, init), max_events=k, eps_corner=eps_corner)
    if len(traj.events) < k:
        raise StabilityError(
            f"La trayectoria de referencia sólo tiene {len(traj.events)} choques (< k = {k})"
        )
    return tuple(e.side for e in traj.events[:k])


def word_prefix_invariant(
    p: OralPolygon,
    init: BallState | Anchor,
    delta: PerturbationSpec,
    k: int,
    eps_corner: float | None = None,
) -> bool:
    """
    ¿Conserva la corrida perturbada los primeros k símbolos de la de referencia?

    Un arranque sobre un lado se perturba en coordenadas (s, ángulo); uno
    interior, desplazándolo perpendicularmente a su dirección. Bajo una
    perturbación geométrica, un arranque sobre un lado conserva su abscisa
    relativa y su ángulo.

    Raises:
        StabilityError: Si la corrida de referencia tiene menos de k choques.
    """
    reference = _reference(p, init, k, eps_corner)
    return _divergence(p, init, delta, k, eps_corner, reference) is None


# ---------- RADIOS ----------
def _unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    u = rng.standard_normal((count, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def _spec(kind: PerturbationKind, delta: float, u: np.ndarray, diameter: float) -> PerturbationSpec:
    if kind is PerturbationKind.KINEMATIC:
        return PerturbationSpec.kinematic(delta * u[0] * diameter, delta * u[1])
    return PerturbationSpec.geometric(delta * u)


def _evaluate(args):
    p, init, spec, k, eps_corner, reference = args
    return _divergence(p, init, spec, k, eps_corner, reference)


def _sweep(p, init, kind, k, ladder, samples, rng, eps_corner, reference, workers):
    dim = 2 if kind is PerturbationKind.KINEMATIC else shape_dimension(p)
    if dim < 1:
        return 0.0, [], [], True
    directions = [_unit_vectors(rng, samples, dim) for _ in ladder]
    jobs = [
        (p, init, _spec(kind, delta, u, p.diameter), k, eps_corner, reference)
        for delta, block in zip(ladder, directions)
        for u in block
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_evaluate(job) for job in jobs]

    radius, broken, monotone = 0.0, False, True
    rows, failures = [], []
    for i, delta in enumerate(ladder):
        block = results[i * samples:(i + 1) * samples]
        bad = [r for r in block if r is not None]
        failures.extend(bad)
        rows.append(LadderRow(kind.value, float(delta), samples - len(bad), samples))
        _logger.debug("%s δ=%g: %d/%d conservan el prefijo", kind.value, delta, samples - len(bad), samples)
        if bad:
            broken = True
        elif broken:
            monotone = False
            _logger.warning("%s δ=%g conserva todas las muestras tras un δ menor fallido", kind.value, delta)
        else:
            radius = float(delta)
    return radius, rows, failures, monotone


def stability_radius(
    p: OralPolygon,
    init: BallState | Anchor,
    kind: str = "both",
    k: int = 2,
    ladder=(1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1),
    samples_per_delta: int = 16,
    rng_seed: int = 0,
    eps_corner: float | None = None,
    subject: str | None = None,
    workers: int = 1,
    strict: bool = False,
) -> StabilityReport:
    """
    Radios empíricos de estabilidad del prefijo de k símbolos.

    Para cada δ de la escalera se muestrean direcciones uniformes en la esfera
    del espacio de perturbación (2 dimensiones cinemáticas: δs = δ·u₀·diámetro,
    δθ = δ·u₁; 2p−4 geométricas). Cada tipo usa su propio flujo aleatorio
    derivado de la semilla, de modo que el informe es determinista.

    Args:
        p (OralPolygon): Polígono.
        init (BallState | Anchor): Arranque de la trayectoria.
        kind (str): 'kinematic', 'geometric' o 'both'.
        k (int): Longitud del prefijo.
        ladder: Valores de δ estrictamente crecientes.
        samples_per_delta (int): Muestras por δ.
        rng_seed (int): Semilla.
        strict (bool): Fallar si un δ mayor conserva todas las muestras tras un
            δ menor con fallos.

    Returns:
        StabilityReport: Radios, filas de la escalera y posiciones de divergencia.

    Raises:
        StabilityError: Escalera no creciente, k < 1 o referencia con menos de k choques,
            o escalera no monótona con `strict`.
    """
    ladder = [float(d) for d in ladder]
    if not ladder or any(d <= 0 for d in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise StabilityError("La escalera de δ debe ser positiva y estrictamente creciente")
    if k < 1 or samples_per_delta < 1:
        raise StabilityError("k y samples_per_delta deben ser positivos")
    try:
        kinds = [PerturbationKind(kind)] if kind != "both" else list(PerturbationKind)
    except ValueError:
        raise StabilityError(f"Tipo de perturbación desconocido: {kind}") from None

    reference = _reference(p, init, k, eps_corner)
    radii: dict[PerturbationKind, float] = {}
    rows: list[LadderRow] = []
    failures: list[int] = []
    monotone = True
    for stream, pk in enumerate(PerturbationKind):
        if pk not in kinds:
            continue
        rng = np.random.default_rng([rng_seed, stream])
        radius, kind_rows, kind_failures, kind_monotone = _sweep(
            p, init, pk, k, ladder, samples_per_delta, rng, eps_corner, reference, workers
        )
        radii[pk] = radius
        rows.extend(kind_rows)
        failures.extend(kind_failures)
        if not kind_monotone:
            if strict:
                raise StabilityError(f"La escalera {pk.value} no es monótona: revisar las tolerancias")
            monotone = False

    kin = radii.get(PerturbationKind.KINEMATIC)
    report = StabilityReport(
        subject=subject or f"{p.name}:{' '.join(reference)}",
        k=k,
        kinematic_radius=kin,
        kinematic_radius_s=None if kin is None else kin * p.diameter,
        kinematic_radius_theta=kin,
        geometric_radius=radii.get(PerturbationKind.GEOMETRIC),
        samples=len(kinds) * len(ladder) * samples_per_delta,
        failures=tuple(failures),
        rows=tuple(rows),
        monotone=monotone,
    )
    _logger.debug(
        "Estabilidad de %s (k=%d): cinemático=%s geométrico=%s",
        report.subject, k, report.kinematic_radius, report.geometric_radius,
    )
    return report


# ---------- FAMILIAS DE TRANSICIÓN ----------
def transition_family(
    p: OralPolygon, side_i: str, side_j: str, rng: np.random.Generator, margin: float = 0.1
) -> BallState:
    """
    Arranque desde un punto interior aleatorio del lado i apuntando a un punto
    interior aleatorio del lado j.

    Raises:
        StabilityError: Si los lados coinciden o el margen no deja tramo interior.
    """
    i, j = p.side_index(side_i), p.side_index(side_j)
    if i == j:
        raise StabilityError("La familia de transición necesita dos lados distintos")
    if not 0.0 <= margin < 0.5:
        raise StabilityError("El margen debe estar en [0, 0.5)")
    si = rng.uniform(margin, 1.0 - margin) * p.lengths[i]
    sj = rng.uniform(margin, 1.0 - margin) * p.lengths[j]
    start = p.point_on_side(i, si)
    d = p.point_on_side(j, sj) - start
    d = d / np.hypot(*d)
    return BallState((float(start[0]), float(start[1])), (float(d[0]), float(d[1])))
