"""
Tests de integración para la API FastAPI.

Estos tests validan:
- Simulación vía POST y errores de arranque.
- Búsqueda de órbitas y catálogo paginado con filtro por palabra.
- Barrido de estabilidad.
- Validación, silabificación y generación de secuencias de fonos.
- Errores de validación (422) y de dominio (400 con índice).
"""

import math

import pytest
from fastapi.testclient import TestClient
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from database import Base, get_db
from main import app

TRIANGLE = {
    "vertices": [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]],
    "side_labels": ["a", "b", "c"],
    "name": "equilatero-api",
}


# ---------- FIXTURES ----------
@pytest.fixture
def client():
    """Cliente con la base de datos del catálogo en memoria."""
    engine = create_engine(
        "sqlite:///:memory:", connect_args={"check_same_thread": False}, poolclass=StaticPool
    )
    TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    Base.metadata.create_all(bind=engine)

    def override_get_db():
        db = TestingSessionLocal()
        try:
            yield db
        finally:
            db.close()

    app.dependency_overrides[get_db] = override_get_db
    try:
        yield TestClient(app)
    finally:
        app.dependency_overrides.clear()


# ---------- SIMULACIÓN ----------
def test_simulate_fagnano(client):
    """
    Verifica que el arranque de Fagnano produzca la palabra θ ʔ χ repetida.
    """
    response = client.post("/api/simulate", json={"init_fagnano": ["θ", "ʔ", "χ"], "max_events": 6})
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "success"
    word = data["data"]["word"]
    assert len(word) == 6
    assert word[:3] == word[3:]
    assert set(word) == {"θ", "ʔ", "χ"}
    assert len(data["data"]["events"]) == 6
    assert data["data"]["termination"]["termination"] == "max_events"


def test_simulate_inline_polygon(client):
    body = {
        "polygon": {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]], "side_labels": ["a", "b", "c", "d"]},
        "init_point": {"x": 0.5, "y": 0.5, "angle": 0.0},
        "max_events": 4,
    }
    response = client.post("/api/simulate", json=body)
    assert response.status_code == 200
    assert response.json()["data"]["word"] == ["b", "d", "b", "d"]


def test_simulate_two_initial_conditions(client):
    """
    Verifica que dos condiciones iniciales generen un error 422.
    """
    body = {"init_fagnano": ["θ", "ʔ", "χ"], "init_point": {"x": 4.0, "y": 2.0, "angle": 0.3}}
    response = client.post("/api/simulate", json=body)
    assert response.status_code == 422
    assert response.json()["status"] == "error"


def test_simulate_start_outside_polygon(client):
    """
    Verifica que un arranque fuera del polígono sea un error de dominio (400).
    """
    response = client.post("/api/simulate", json={"init_point": {"x": -5.0, "y": 1.0, "angle": 0.0}})
    assert response.status_code == 400
    assert response.json()["status"] == "error"


def test_simulate_unknown_side(client):
    """
    Verifica que un lado inexistente en la condición inicial sea un error 400.
    """
    response = client.post("/api/simulate", json={"init_anchor": {"side": "q", "s": 1.0, "angle": 1.0}})
    assert response.status_code == 400
    assert "q" in response.json()["message"]


# ---------- ÓRBITAS ----------
def test_search_and_list_orbits(client):
    """
    Verifica que la búsqueda llene el catálogo y que el listado pagine y filtre.
    """
    body = {"polygon": TRIANGLE, "n_s": 2, "n_angles": 2, "period_max": 3}
    response = client.post("/api/orbits/search", json=body)
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["polygon"] == "equilatero-api"
    assert data["orbits"]

    response = client.get("/api/orbits?limit=1&offset=0")
    assert response.status_code == 200
    assert len(response.json()["results"]) == 1

    response = client.get("/api/orbits", params={"word": "a b c"})
    results = response.json()["results"]
    assert results
    assert all(r["polygon_name"] == "equilatero-api" for r in results)
    assert results[0]["word"] == ["a", "b", "c"]


def test_list_orbits_empty_catalog(client):
    response = client.get("/api/orbits")
    assert response.status_code == 200
    assert response.json() == {"status": "success", "results": []}


def test_search_right_triangle_grid(client):
    body = {
        "polygon": {"vertices": [[0, 0], [1, 0], [0, 1]], "side_labels": ["a", "b", "c"]},
        "n_s": 0,
    }
    response = client.post("/api/orbits/search", json=body)
    assert response.status_code == 422


# ---------- ESTABILIDAD ----------
def test_stability_report(client):
    body = {
        "init_fagnano": ["θ", "ʔ", "χ"],
        "kind": "kinematic",
        "k": 3,
        "ladder": [1e-6, 1e-4],
        "samples_per_delta": 2,
    }
    response = client.post("/api/stability", json=body)
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["kinematic_radius"] > 0
    assert data["geometric_radius"] is None
    assert data["samples"] == 4


def test_stability_decreasing_ladder(client):
    body = {"init_fagnano": ["θ", "ʔ", "χ"], "ladder": [1e-2, 1e-4]}
    response = client.post("/api/stability", json=body)
    assert response.status_code == 422


# ---------- GRAMÁTICA ----------
def test_grammar_validate(client):
    response = client.post("/api/grammar/validate", json={"phones": "θ/P a/A"})
    assert response.status_code == 200
    (syllable,) = response.json()["data"]["syllables"]
    assert syllable["syllabic"] == 1


def test_grammar_validate_error_index(client):
    """
    Verifica que una transición inadmisible devuelva 400 con el índice del error.
    """
    response = client.post("/api/grammar/validate", json={"phones": "θ/P θ/P a/A"})
    assert response.status_code == 400
    data = response.json()
    assert data["status"] == "error"
    assert data["index"] == 1


def test_grammar_empty_phones(client):
    response = client.post("/api/grammar/validate", json={"phones": ""})
    assert response.status_code == 422


def test_grammar_syllabify(client):
    response = client.post("/api/grammar/syllabify", json={"phones": "θ/P a/A θ/M i/A"})
    assert response.status_code == 200
    assert response.json()["data"]["boundaries"] == [2]


def test_grammar_generate(client):
    response = client.post("/api/grammar/generate", json={"seed": 7, "count": 5})
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["syllables"] == 5

    check = client.post("/api/grammar/validate", json={"phones": data["phones"]})
    assert len(check.json()["data"]["syllables"]) == 5


def test_grammar_generate_count_too_large(client):
    response = client.post("/api/grammar/generate", json={"seed": 0, "count": 10000})
    assert response.status_code == 422
