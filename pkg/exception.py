from fastapi import Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse


class OralBilliardsError(Exception):
    """Error base del dominio."""


class ConfigError(OralBilliardsError):
    """Archivo de configuración ausente, ilegible o inválido."""


class GeometryError(OralBilliardsError):
    """Polígono no convexo, degenerado o parámetros fuera de rango."""


class SimulationError(OralBilliardsError):
    """Fallo numérico de la simulación (la bola escapa del polígono)."""


class OrbitError(OralBilliardsError):
    """Construcción o búsqueda de órbitas periódicas fallida."""


class StabilityError(OralBilliardsError):
    """Barrido de estabilidad sin trayectoria de referencia válida."""


class PhoneticsError(OralBilliardsError):
    """Símbolo desconocido o combinación manera/lugar incompatible."""


class InventoryError(PhoneticsError):
    """Inventario de ptongos inconsistente."""


class GrammarError(OralBilliardsError):
    """Transición inadmisible en una secuencia de fonos.

    Attributes:
        index (int): Índice del token donde falla el análisis.
        reason (str): Motivo legible.
    """

    def __init__(self, index: int, reason: str):
        super().__init__(f"error en el índice {index}: {reason}")
        self.index = index
        self.reason = reason


async def domain_exception_handler(request: Request, exc: OralBilliardsError):
    content = {"status": "error", "message": str(exc)}
    if isinstance(exc, GrammarError):
        content["index"] = exc.index
    return JSONResponse(status_code=400, content=content)


async def validation_exception_handler(request: Request, exc: RequestValidationError):
    return JSONResponse(
        status_code=422,
        content={"status": "error", "message": "Error de validación", "details": jsonable_encoder(exc.errors())},
    )


async def generic_exception_handler(request: Request, exc: Exception):
    return JSONResponse(
        status_code=500,
        content={"status": "error", "message": "Error interno del servidor"},
    )
