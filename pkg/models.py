"""
Modelos de datos: archivos de configuración, cuerpos de la API, registros de
datos versionados y ORM del catálogo de órbitas.
"""

from datetime import datetime, timezone
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from sqlalchemy import Column, DateTime, Float, Integer, String

from database import Base as SQLBase  # alias para evitar colisiones

PlaceToken = Literal["PAL", "VUP", "Glottal"]
FrontBackToken = Literal[
    "Back′", "BackLike′", "Central′", "FrontLike′", "Front′",
    "Front", "FrontLike", "Central", "BackLike", "Back",
]
OpenCloseToken = Literal["close", "closeLike", "closeMid", "mid", "openMid", "openLike", "open"]
MannerToken = Literal["A", "C", "P", "F", "M", "V", "H", "□"]
DirectionToken = Literal["up", "down", "level"]


class OrbitORM(SQLBase):
    """
    Fila del catálogo de órbitas periódicas.
    """
    __tablename__ = "orbits"

    id = Column(Integer, primary_key=True, autoincrement=True)
    polygon_name = Column(String, index=True)
    word = Column(String, index=True)
    period = Column(Integer)
    anchor_side = Column(Integer)
    anchor_s = Column(Float)
    anchor_angle = Column(Float)
    closure_error = Column(Float)
    created_at = Column(DateTime, default=lambda: datetime.now(timezone.utc))

    def to_dict(self) -> dict:
        """
        Convierte la instancia ORM a un diccionario serializable.
        """
        return {
            "id": self.id,
            "polygon_name": self.polygon_name,
            "word": self.word.split(" ") if self.word else [],
            "period": self.period,
            "anchor": {"side": self.anchor_side, "s": self.anchor_s, "angle": self.anchor_angle},
            "closure_error": self.closure_error,
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }


# ---------- ARCHIVOS DE DATOS ----------
class PolygonConfig(BaseModel):
    """
    Archivo de polígono: vértices en cm (antihorario) y una etiqueta por lado.
    El lado i va del vértice i al vértice i+1.
    """
    vertices: list[tuple[float, float]]
    side_labels: list[str]
    labial_corner: int | None = None
    jaw_drop: float = Field(default=0.0, ge=0)
    jaw_hinge: float = Field(default=0.0, ge=0)
    velum_hinge: float = Field(default=0.0, ge=0)
    velum_closed: bool = False
    scale: float | None = Field(default=None, gt=0)
    name: str = "polygon"
    version: int | None = None

    @field_validator("vertices")
    def validate_vertices(cls, v):
        if len(v) < 3:
            raise ValueError("Un polígono necesita al menos 3 vértices")
        return v

    @field_validator("side_labels")
    def validate_labels(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("Las etiquetas de lado deben ser distintas")
        return v

    @model_validator(mode="after")
    def validate_shape(self):
        if len(self.vertices) != len(self.side_labels):
            raise ValueError("Debe haber exactamente una etiqueta por lado")
        if self.labial_corner is not None and not 0 <= self.labial_corner < len(self.vertices):
            raise ValueError("labial_corner fuera de rango")
        return self


class PhthongRecord(BaseModel):
    """
    Celda del inventario de ptongos tal como aparece en el archivo JSON.
    """
    model_config = ConfigDict(populate_by_name=True)

    symbol: str
    place: PlaceToken
    front_back: FrontBackToken = Field(alias="frontBack")
    open_close: OpenCloseToken = Field(alias="openClose")
    polygonal: bool = False
    provisional: bool = False
    asymmetric: bool = False

    @field_validator("symbol")
    def validate_symbol(cls, v):
        if not v.strip() or "/" in v or any(c.isspace() for c in v):
            raise ValueError("Símbolo vacío o con caracteres reservados")
        return v


class ArcRecord(BaseModel):
    """
    Arco del archivo de gramática.
    """
    model_config = ConfigDict(populate_by_name=True)

    from_: MannerToken = Field(alias="from")
    to: MannerToken
    direction: DirectionToken
    homorganic: bool = False
    diphthongal: bool = False

    @model_validator(mode="after")
    def validate_kind(self):
        if self.homorganic and self.diphthongal:
            raise ValueError("Un arco no puede ser homorgánico y diptongal a la vez")
        if (self.direction == "level") != (self.from_ == self.to):
            raise ValueError("Solo los autolazos son arcos 'level'")
        return self


# ---------- CONFIGURACIÓN DE EJECUCIÓN ----------
class AnchorIn(BaseModel):
    """Punto de fase sobre un lado: etiqueta, abscisa s (cm) y ángulo respecto al lado (rad)."""
    side: str
    s: float = Field(ge=0)
    angle: float = Field(gt=0, lt=3.141592653589793)


class PointIn(BaseModel):
    """Punto interior y ángulo absoluto de la dirección (rad)."""
    x: float
    y: float
    angle: float


class DriveConfig(BaseModel):
    restitution: float = Field(default=1.0, gt=0, le=1)
    reforce_speed: float | None = Field(default=None, gt=0)
    direction_jitter: float = Field(default=0.0, ge=0)
    speed_floor: float = Field(default=0.0, ge=0)


class PolygonSource(BaseModel):
    """
    Origen del polígono: archivo, polígono en línea o polígono canónico a una escala,
    más los articuladores aplicados encima.
    """
    polygon: PolygonConfig | None = None
    polygon_file: str | None = None
    scale: float = Field(default=8.0, ge=6, le=10)
    jaw_drop: float = Field(default=0.0, ge=0)
    jaw_hinge: float = Field(default=0.0, ge=0)
    velum_hinge: float = Field(default=0.0, ge=0)
    velum_closed: bool = False

    @model_validator(mode="after")
    def validate_source(self):
        if self.polygon is not None and self.polygon_file is not None:
            raise ValueError("Indique 'polygon' o 'polygon_file', no ambos")
        return self


class InitSource(BaseModel):
    """
    Condición inicial: exactamente una de init_anchor, init_point o init_fagnano
    (tres etiquetas de lado cuyo triángulo de Fagnano se usa como arranque).
    """
    init_anchor: AnchorIn | None = None
    init_point: PointIn | None = None
    init_fagnano: list[str] | None = None

    @field_validator("init_fagnano")
    def validate_fagnano(cls, v):
        if v is not None and len(set(v)) != 3:
            raise ValueError("init_fagnano requiere tres lados distintos")
        return v

    @model_validator(mode="after")
    def validate_init(self):
        given = [f for f in (self.init_anchor, self.init_point, self.init_fagnano) if f is not None]
        if len(given) != 1:
            raise ValueError("Debe darse exactamente una forma de condición inicial")
        return self


class RunConfig(PolygonSource, InitSource):
    """
    Configuración de `simulate`.
    """
    speed: float = Field(default=1.0, gt=0)
    ball_radius: float = Field(default=0.0, ge=0)
    radius_schedule: dict[int, float] = Field(default_factory=dict)
    drive: DriveConfig | None = None
    max_events: int = Field(default=100, ge=0)
    eps_corner: float | None = Field(default=None, gt=0)
    eps_graze: float = Field(default=1e-9, gt=0)
    seed: int = 0
    out_dir: str | None = None
    svg: bool = False

    @field_validator("radius_schedule")
    def validate_schedule(cls, v):
        if any(k < 0 or r < 0 for k, r in v.items()):
            raise ValueError("El calendario de radios requiere índices y radios no negativos")
        return v


class OrbitSearchConfig(PolygonSource):
    """
    Configuración de `orbits`: rejilla (lado, s, ángulo) y período máximo.
    """
    n_s: int = Field(default=24, ge=1)
    n_angles: int = Field(default=36, ge=1)
    sides: list[str] | None = None
    period_max: int = Field(default=10, ge=2)
    tol_rel: float = Field(default=1e-7, gt=0)
    eps_corner: float | None = Field(default=None, gt=0)
    workers: int = Field(default=1, ge=1)
    out_dir: str | None = None
    svg: bool = False


class StabilityConfig(PolygonSource, InitSource):
    """
    Configuración de `stability`.
    """
    kind: Literal["kinematic", "geometric", "both"] = "both"
    k: int = Field(default=2, ge=1)
    ladder: list[float] = Field(default_factory=lambda: [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1])
    samples_per_delta: int = Field(default=16, ge=1)
    eps_corner: float | None = Field(default=None, gt=0)
    seed: int = 0
    strict: bool = False
    out_dir: str | None = None

    @field_validator("ladder")
    def validate_ladder(cls, v):
        if not v or any(d <= 0 for d in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("La escalera de δ debe ser positiva y estrictamente creciente")
        return v


# ---------- CUERPOS DE LA API ----------
class PhonesIn(BaseModel):
    """Secuencia de fonos en notación de texto, p. ej. 'θ/P a/A'."""
    phones: str

    @field_validator("phones")
    def validate_phones(cls, v):
        if not v.strip():
            raise ValueError("La secuencia de fonos está vacía")
        return v


class GenerateIn(BaseModel):
    seed: int = 0
    count: int = Field(default=1, ge=0, le=5000)
