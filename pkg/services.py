# services.py
"""
Orquestación compartida por la CLI y la API: construye polígonos y condiciones
iniciales a partir de las configuraciones validadas y delega en los módulos
del dominio.
"""

import logging
from dataclasses import dataclass

from dynamics import (
    BallSpec,
    BallState,
    DriveSpec,
    Trajectory,
    cxc_units,
    event_record,
    simulate_driven,
    termination_record,
)
from exception import ConfigError, OralBilliardsError, OrbitError
from geometry import (
    OralPolygon,
    apply_articulators,
    build_default_polygon,
    erode,
    load_polygon,
    polygon_from_config,
    side_triangle,
)
from grammar import Grammar, Syllabification, SyllableParse, build_default_grammar, generate, syllabify, validate
from models import InitSource, OrbitSearchConfig, PolygonSource, RunConfig, StabilityConfig
from orbits import Anchor, PeriodicOrbit, PhaseGrid, fagnano_orbit, find_periodic
from phonetics import Inventory, format_phones, load_inventory, parse_phones
from repositories import orbit_to_row
from stability import StabilityReport, stability_radius

_logger = logging.getLogger(__name__)


def build_polygon(source: PolygonSource) -> OralPolygon:
    """
    Polígono descrito por la configuración: en línea, desde archivo o el canónico
    a la escala pedida, con los articuladores aplicados encima.

    Raises:
        ConfigError: Archivo ausente o inválido.
        GeometryError: Escala fuera de rango o articulación no convexa.
    """
    if source.polygon is not None:
        p = polygon_from_config(source.polygon)
    elif source.polygon_file is not None:
        p = load_polygon(source.polygon_file)
    else:
        p = build_default_polygon(source.scale)
    if source.jaw_drop or source.jaw_hinge or source.velum_hinge or source.velum_closed:
        p = apply_articulators(p, source.jaw_drop, source.jaw_hinge, source.velum_hinge, source.velum_closed)
    return p


def fagnano_anchor(p: OralPolygon, labels) -> Anchor:
    """
    Ancla, en coordenadas del polígono, de la órbita de Fagnano del triángulo
    formado por las rectas de tres lados.

    Raises:
        OrbitError: Si el triángulo no es acutángulo o el pie de partida cae fuera del lado.
    """
    tri = side_triangle(p, labels)
    orbit = fagnano_orbit(tri)
    label = tri.side_labels[orbit.anchor.side]
    side = p.side_index(label)
    point = tri.point_on_side(orbit.anchor.side, orbit.anchor.s)
    s = float((point - p.points[side]) @ p.tangents[side])
    if not 0 < s < p.lengths[side]:
        raise OrbitError(f"El pie de la órbita de Fagnano cae fuera del lado {label}")
    return Anchor(side, s, orbit.anchor.angle)


def _check_labels(p: OralPolygon, labels) -> None:
    unknown = [l for l in labels if l not in p.side_labels]
    if unknown:
        raise ConfigError(f"Lados desconocidos en la condición inicial: {unknown}; el polígono tiene {list(p.side_labels)}")


def initial_condition(p: OralPolygon, init: InitSource) -> Anchor | BallState:
    """
    Condición inicial como ancla sobre un lado o como estado interior.

    Raises:
        ConfigError: Si nombra un lado que el polígono no tiene.
        OrbitError: Si el ancla cae fuera de su lado.
    """
    if init.init_anchor is not None:
        a = init.init_anchor
        _check_labels(p, [a.side])
        side = p.side_index(a.side)
        if not 0 < a.s < p.lengths[side]:
            raise OrbitError(f"s = {a.s} fuera del lado {a.side} (longitud {p.lengths[side]:.6g})")
        return Anchor(side, a.s, a.angle)
    if init.init_point is not None:
        pt = init.init_point
        return BallState.from_angle(pt.x, pt.y, pt.angle)
    _check_labels(p, init.init_fagnano)
    return fagnano_anchor(p, init.init_fagnano)


@dataclass(frozen=True)
class SimulationOutcome:
    polygon: OralPolygon
    trajectory: Trajectory

    @property
    def word(self) -> tuple[str, ...]:
        return self.trajectory.word

    def cxc(self) -> list[dict]:
        if len(self.trajectory.events) < 2:
            return []
        return [
            {"first": u.first, "flight_length": u.flight_length, "second": u.second,
             "pattern": u.pattern, "in_syllable": u.in_syllable}
            for u in cxc_units(self.trajectory)
        ]

    def to_dict(self) -> dict:
        return {
            "polygon": self.polygon.name,
            "word": list(self.word),
            "termination": termination_record(self.trajectory),
            "events": [event_record(e) for e in self.trajectory.events],
            "cxc": self.cxc(),
        }


class SimulationService:
    """
    Servicio que ejecuta una simulación a partir de un RunConfig.
    """

    def run(self, cfg: RunConfig) -> SimulationOutcome:
        """
        Construye el polígono y el estado inicial y simula.

        Args:
            cfg (RunConfig): Configuración validada.

        Returns:
            SimulationOutcome: Polígono y trayectoria.
        """
        try:
            p = build_polygon(cfg)
            init = initial_condition(p, cfg)
            if isinstance(init, Anchor):
                # el centro de una bola finita arranca sobre el lado de la mesa erosionada
                table = erode(p, cfg.ball_radius)
                point = p.point_on_side(init.side, init.s) + cfg.ball_radius * p.normals[init.side]
                s = float((point - table.points[init.side]) @ table.tangents[init.side])
                if not 0 < s < table.lengths[init.side]:
                    raise OrbitError("El arranque queda fuera del lado de la mesa erosionada")
                state = BallState.on_side(table, init.side, s, init.angle, cfg.speed)
            else:
                state = BallState(init.position, init.direction, cfg.speed)
            drive = DriveSpec(**cfg.drive.model_dump()) if cfg.drive is not None else DriveSpec()
            trajectory = simulate_driven(
                p,
                state,
                BallSpec(cfg.ball_radius, dict(cfg.radius_schedule)),
                drive,
                cfg.max_events,
                cfg.eps_corner,
                cfg.seed,
                cfg.eps_graze,
            )
        except OralBilliardsError as exc:
            _logger.warning("Simulación rechazada: %s", exc)
            raise
        _logger.info(
            "Simulación en %s: %d eventos, terminación %s",
            p.name, len(trajectory.events), trajectory.termination.value,
        )
        return SimulationOutcome(p, trajectory)


class OrbitService:
    """
    Servicio de búsqueda y catálogo de órbitas periódicas.
    """

    def __init__(self, repository=None):
        """
        Args:
            repository (OrbitRepository | None): Repositorio del catálogo; sin él
                la búsqueda no se persiste.
        """
        self.repository = repository

    def search(self, cfg: OrbitSearchConfig) -> tuple[OralPolygon, list[PeriodicOrbit]]:
        """
        Busca órbitas y, si hay repositorio, reemplaza el catálogo del polígono.
        """
        try:
            p = build_polygon(cfg)
            grid = PhaseGrid(cfg.n_s, cfg.n_angles, tuple(cfg.sides) if cfg.sides else None)
            orbits = find_periodic(p, grid, cfg.period_max, cfg.tol_rel, cfg.eps_corner, workers=cfg.workers)
        except OralBilliardsError as exc:
            _logger.warning("Búsqueda de órbitas rechazada: %s", exc)
            raise
        if self.repository is not None:
            self.repository.delete_all(p.name)
            self.repository.save_many([orbit_to_row(o) for o in orbits])
        _logger.info("Búsqueda de órbitas en %s: %d órbitas", p.name, len(orbits))
        return p, orbits

    def list_orbits(self, limit: int = 10, offset: int = 0, word: str | None = None):
        """
        Catálogo paginado; con `word` filtra por subcadena de la palabra canónica.

        Raises:
            ValueError: Si no hay repositorio configurado.
        """
        if self.repository is None:
            raise ValueError("El servicio no tiene repositorio")
        if word:
            return self.repository.search(word, limit, offset)
        return self.repository.list(limit, offset)


class StabilityService:
    """
    Servicio de barridos de estabilidad.
    """

    def run(self, cfg: StabilityConfig) -> StabilityReport:
        try:
            p = build_polygon(cfg)
            init = initial_condition(p, cfg)
            report = stability_radius(
                p,
                init,
                kind=cfg.kind,
                k=cfg.k,
                ladder=cfg.ladder,
                samples_per_delta=cfg.samples_per_delta,
                rng_seed=cfg.seed,
                eps_corner=cfg.eps_corner,
                strict=cfg.strict,
            )
        except OralBilliardsError as exc:
            _logger.warning("Estabilidad rechazada: %s", exc)
            raise
        _logger.info(
            "Estabilidad de %s: k=%d cinemático=%s geométrico=%s",
            report.subject, report.k, report.kinematic_radius, report.geometric_radius,
        )
        return report


class GrammarService:
    """
    Servicio de validación, silabificación y generación de secuencias de fonos.
    """

    def __init__(self, inventory: Inventory | None = None, grammar: Grammar | None = None):
        self.inventory = inventory or load_inventory()
        self.grammar = grammar or build_default_grammar()

    def validate(self, text: str) -> list[SyllableParse]:
        phones = parse_phones(text, self.inventory)
        try:
            parses = validate(phones, self.grammar)
        except OralBilliardsError as exc:
            _logger.warning("Secuencia rechazada '%s': %s", text, exc)
            raise
        _logger.info("Secuencia validada: %d fonos, %d sílabas", len(phones), len(parses))
        return parses

    def syllabify(self, text: str) -> Syllabification:
        phones = parse_phones(text, self.inventory)
        try:
            result = syllabify(phones, self.grammar)
        except OralBilliardsError as exc:
            _logger.warning("Secuencia rechazada '%s': %s", text, exc)
            raise
        _logger.info("Secuencia silabificada: %d fonos, %d fronteras", len(phones), len(result.boundaries))
        return result

    def generate(self, seed: int = 0, count: int = 1) -> str:
        phones = generate(seed, count, self.inventory, self.grammar)
        _logger.info("Generadas %d sílabas con semilla %d", count, seed)
        return format_phones(phones)
