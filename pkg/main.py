import logging

from fastapi import Depends, FastAPI
from fastapi.exceptions import RequestValidationError
from sqlalchemy.orm import Session

import config
from database import Base, engine, get_db
from exception import (
    OralBilliardsError,
    domain_exception_handler,
    generic_exception_handler,
    validation_exception_handler,
)
from models import GenerateIn, OrbitSearchConfig, PhonesIn, RunConfig, StabilityConfig
from repositories import OrbitRepository
from services import GrammarService, OrbitService, SimulationService, StabilityService

logging.basicConfig(level=config.LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

Base.metadata.create_all(bind=engine)

app = FastAPI(title="Oral Billiards API", version="1.0")
app.add_exception_handler(OralBilliardsError, domain_exception_handler)
app.add_exception_handler(RequestValidationError, validation_exception_handler)
app.add_exception_handler(Exception, generic_exception_handler)


@app.post("/api/simulate", response_model=dict)
def simulate_run(run: RunConfig):
    """
    Simula una trayectoria en el polígono pedido.

    Args:
        run (RunConfig): Polígono, condición inicial, bola y forzamiento.

    Returns:
        dict: Diccionario con la forma:
            {
                "status": "success",
                "data": { "word": [...], "events": [...], "termination": {...}, "cxc": [...] }
            }

    Errores:
        400: Geometría inválida o arranque fuera del polígono.
        422: Configuración inválida.
    """
    outcome = SimulationService().run(run)
    return {"status": "success", "data": outcome.to_dict()}


@app.post("/api/orbits/search", response_model=dict)
def search_orbits(search: OrbitSearchConfig, db: Session = Depends(get_db)):
    """
    Busca órbitas periódicas y reemplaza el catálogo del polígono.

    Returns:
        dict: {"status": "success", "data": {"polygon": str, "orbits": [...]}}
    """
    service = OrbitService(OrbitRepository(db))
    polygon, orbits = service.search(search)
    return {"status": "success", "data": {"polygon": polygon.name, "orbits": [o.to_dict() for o in orbits]}}


@app.get("/api/orbits", response_model=dict)
async def list_orbits(
    limit: int = 10,
    offset: int = 0,
    word: str | None = None,
    db: Session = Depends(get_db),
):
    """
    Catálogo de órbitas con paginación y filtro opcional por subcadena de la palabra.

    Args:
        limit (int, opcional): Número máximo de resultados (default: 10).
        offset (int, opcional): Número de resultados a omitir (default: 0).
        word (str | None, opcional): Texto que debe contener la palabra canónica.

    Returns:
        dict: {"status": "success", "results": [ ...órbitas... ]}
    """
    service = OrbitService(OrbitRepository(db))
    results = service.list_orbits(limit, offset, word)
    return {"status": "success", "results": [r.to_dict() for r in results]}


@app.post("/api/stability", response_model=dict)
def stability(cfg: StabilityConfig):
    """
    Radios de estabilidad del prefijo de k símbolos.

    Returns:
        dict: {"status": "success", "data": { ...informe... }}
    """
    report = StabilityService().run(cfg)
    return {"status": "success", "data": report.to_dict()}


@app.post("/api/grammar/validate", response_model=dict)
async def grammar_validate(body: PhonesIn):
    """
    Valida una secuencia de fonos ('θ/P a/A').

    Errores:
        400: Transición inadmisible; la respuesta incluye `index`.
    """
    parses = GrammarService().validate(body.phones)
    return {"status": "success", "data": {"syllables": [s.to_dict() for s in parses]}}


@app.post("/api/grammar/syllabify", response_model=dict)
async def grammar_syllabify(body: PhonesIn):
    result = GrammarService().syllabify(body.phones)
    return {"status": "success", "data": result.to_dict()}


@app.post("/api/grammar/generate", response_model=dict)
async def grammar_generate(body: GenerateIn):
    phones = GrammarService().generate(body.seed, body.count)
    return {"status": "success", "data": {"phones": phones, "syllables": body.count}}
