"""
Tests unitarios para la capa de servicios y repositorios.

Incluye validaciones de:
- Modelos Pydantic de configuración (condición inicial, escalera, origen del polígono).
- Servicios (simulación, búsqueda de órbitas, estabilidad, gramática).
- Repositorio ORM del catálogo de órbitas (CRUD, filtros, búsqueda y paginación).
"""

import math

import pytest
from pydantic import ValidationError
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from database import Base
from exception import ConfigError, GrammarError, OrbitError, PhoneticsError
from models import OrbitSearchConfig, PhonesIn, RunConfig, StabilityConfig
from orbits import same_cyclic_family
from repositories import OrbitRepository
from services import (
    GrammarService,
    OrbitService,
    SimulationService,
    StabilityService,
    build_polygon,
)

TRIANGLE = {
    "vertices": [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]],
    "side_labels": ["a", "b", "c"],
    "name": "equilatero",
}


# ---------- FIXTURES ----------
@pytest.fixture
def repo():
    """Crea un repositorio con base de datos SQLite en memoria."""
    engine = create_engine("sqlite:///:memory:", connect_args={"check_same_thread": False})
    TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    Base.metadata.create_all(bind=engine)
    db = TestingSessionLocal()
    try:
        yield OrbitRepository(db)
    finally:
        db.close()


@pytest.fixture
def orbit_service(repo: OrbitRepository):
    """Devuelve un OrbitService con el repositorio de pruebas."""
    return OrbitService(repo)


def _row(word: str, period: int, polygon_name: str = "poly") -> dict:
    return {
        "polygon_name": polygon_name,
        "word": word,
        "period": period,
        "anchor_side": 0,
        "anchor_s": 0.5,
        "anchor_angle": 1.0,
        "closure_error": 1e-14,
    }


# ---------- TESTS DE MODELO ----------
def test_two_initial_conditions_raise():
    """Dar dos formas de condición inicial debe disparar excepción en el modelo."""
    with pytest.raises(ValidationError):
        RunConfig(
            init_fagnano=["θ", "ʔ", "χ"],
            init_point={"x": 4.0, "y": 2.0, "angle": 0.3},
        )


def test_missing_initial_condition_raises():
    with pytest.raises(ValidationError):
        RunConfig()


def test_fagnano_needs_three_distinct_sides():
    with pytest.raises(ValidationError):
        RunConfig(init_fagnano=["θ", "θ", "χ"])


def test_decreasing_ladder_raises():
    with pytest.raises(ValidationError):
        StabilityConfig(init_fagnano=["θ", "ʔ", "χ"], ladder=[1e-2, 1e-3])


def test_polygon_and_file_both_raise():
    with pytest.raises(ValidationError):
        OrbitSearchConfig(polygon=TRIANGLE, polygon_file="otro.json")


def test_scale_out_of_range_raises():
    with pytest.raises(ValidationError):
        RunConfig(init_fagnano=["θ", "ʔ", "χ"], scale=5.0)


def test_empty_phones_raise():
    with pytest.raises(ValidationError):
        PhonesIn(phones="   ")


# ---------- TESTS DE SERVICIO ----------
def test_build_polygon_with_velum_closed():
    p = build_polygon(OrbitSearchConfig(velum_closed=True))
    assert p.n_sides == 5


def test_simulation_fagnano_default():
    """El arranque de Fagnano en el hexágono recorre θ, ʔ, χ."""
    outcome = SimulationService().run(RunConfig(init_fagnano=["θ", "ʔ", "χ"], max_events=9))
    assert len(outcome.word) == 9
    assert same_cyclic_family(outcome.word[:3], ("θ", "ʔ", "χ"))
    assert outcome.word[:3] * 3 == outcome.word
    data = outcome.to_dict()
    assert data["termination"]["termination"] == "max_events"
    assert len(data["cxc"]) == 8


def test_simulation_zero_events_has_no_cxc():
    outcome = SimulationService().run(RunConfig(init_fagnano=["θ", "ʔ", "χ"], max_events=0))
    assert outcome.word == ()
    assert outcome.cxc() == []


def test_simulation_finite_ball_from_anchor():
    cfg = RunConfig(init_fagnano=["θ", "ʔ", "χ"], ball_radius=0.2, max_events=12)
    outcome = SimulationService().run(cfg)
    assert len(outcome.trajectory.events) > 0
    for e in outcome.trajectory.events:
        assert min(outcome.polygon.signed_distances(e.point)) == pytest.approx(0.2, abs=1e-9)


def test_simulation_anchor_outside_side_raises():
    cfg = RunConfig(init_anchor={"side": "ʔ", "s": 100.0, "angle": 1.0})
    with pytest.raises(OrbitError):
        SimulationService().run(cfg)


def test_simulation_unknown_side_raises():
    """Un lado que el polígono no tiene es un error de configuración."""
    cfg = RunConfig(init_anchor={"side": "q", "s": 1.0, "angle": 1.0})
    with pytest.raises(ConfigError):
        SimulationService().run(cfg)


def test_simulation_unknown_fagnano_side_raises():
    with pytest.raises(ConfigError):
        SimulationService().run(RunConfig(init_fagnano=["θ", "ʔ", "q"]))


def test_simulation_closed_velum_has_no_velar_palatal_side():
    cfg = RunConfig(init_anchor={"side": "xⁱ", "s": 0.5, "angle": 1.0}, velum_closed=True)
    with pytest.raises(ConfigError):
        SimulationService().run(cfg)


def test_orbit_search_saves_catalog(orbit_service: OrbitService):
    """La búsqueda guarda una fila por órbita y la repetición reemplaza el catálogo."""
    cfg = OrbitSearchConfig(polygon=TRIANGLE, n_s=2, n_angles=2, period_max=3)
    polygon, orbits = orbit_service.search(cfg)
    assert polygon.name == "equilatero"
    assert any(o.canonical_word == ("a", "b", "c") for o in orbits)

    rows = orbit_service.list_orbits(limit=100)
    assert len(rows) == len(orbits)

    orbit_service.search(cfg)
    assert len(orbit_service.list_orbits(limit=100)) == len(orbits)

    found = orbit_service.list_orbits(word="a b c")
    assert found
    assert found[0].to_dict()["word"] == ["a", "b", "c"]


def test_orbit_search_uses_corner_radius(orbit_service: OrbitService):
    cfg = OrbitSearchConfig(polygon=TRIANGLE, n_s=2, n_angles=2, period_max=3, eps_corner=1e-4)
    _, orbits = orbit_service.search(cfg)
    assert any(o.canonical_word == ("a", "b", "c") for o in orbits)


def test_list_orbits_without_repository_raises():
    with pytest.raises(ValueError):
        OrbitService().list_orbits()


def test_stability_service_fagnano():
    cfg = StabilityConfig(
        init_fagnano=["θ", "ʔ", "χ"], kind="kinematic", k=3, ladder=[1e-6, 1e-4], samples_per_delta=4
    )
    report = StabilityService().run(cfg)
    assert report.kinematic_radius > 0
    assert report.subject.startswith("oral-default")


def test_stability_service_strict_flag():
    cfg = StabilityConfig(init_fagnano=["θ", "ʔ", "χ"], strict=True, k=3, ladder=[1e-6], samples_per_delta=2)
    report = StabilityService().run(cfg)
    assert report.monotone


def test_grammar_service_validate():
    parses = GrammarService().validate("θ/P a/A")
    assert len(parses) == 1


def test_grammar_service_rejects(caplog):
    """Una transición inadmisible se registra y se propaga con su índice."""
    with pytest.raises(GrammarError) as exc:
        GrammarService().validate("θ/P θ/P a/A")
    assert exc.value.index == 1
    assert "rechazada" in caplog.text


def test_grammar_service_unknown_symbol():
    with pytest.raises(PhoneticsError):
        GrammarService().syllabify("q/A")


def test_grammar_service_generate():
    text = GrammarService().generate(seed=4, count=3)
    assert len(GrammarService().validate(text)) == 3


# ---------- TESTS DE REPOSITORIO ----------
def test_save_and_get(repo: OrbitRepository):
    obj = repo.save(_row("a b c", 3))
    fetched = repo.get(obj.id)
    assert fetched is not None
    assert fetched.to_dict()["word"] == ["a", "b", "c"]
    assert fetched.to_dict()["anchor"] == {"side": 0, "s": 0.5, "angle": 1.0}
    assert repo.get(obj.id + 1000) is None


def test_list_filters_by_polygon(repo: OrbitRepository):
    repo.save_many([_row("a b", 2, "cuadrado"), _row("a b c", 3, "triangulo")])
    results = repo.list(polygon_name="cuadrado")
    assert [r.polygon_name for r in results] == ["cuadrado"]


def test_list_orders_by_period(repo: OrbitRepository):
    repo.save_many([_row("a b c d", 4), _row("a b", 2), _row("a b c", 3)])
    assert [r.period for r in repo.list()] == [2, 3, 4]


def test_search_word(repo: OrbitRepository):
    """Buscar debe devolver sólo las órbitas cuya palabra contiene el texto."""
    repo.save_many([_row("θ ʔ χ", 3), _row("ç ʔ χ", 3), _row("θ ç", 2)])
    results = repo.search("ʔ χ")
    assert {r.word for r in results} == {"θ ʔ χ", "ç ʔ χ"}


def test_delete_all(repo: OrbitRepository):
    repo.save_many([_row("a b", 2, "p1"), _row("a b c", 3, "p1"), _row("a b", 2, "p2")])
    assert repo.delete_all("p1") == 2
    assert [r.polygon_name for r in repo.list()] == ["p2"]


def test_pagination(repo: OrbitRepository):
    """La paginación debe devolver subconjuntos correctos."""
    repo.save_many([_row(f"w{i}", 2 + i) for i in range(5)])

    page1 = repo.list(limit=2, offset=0)
    page2 = repo.list(limit=2, offset=2)

    assert len(page1) == 2
    assert len(page2) == 2
    assert page1[0].id != page2[0].id
    assert [r.period for r in page2] == [4, 5]
