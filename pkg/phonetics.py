"""
Sistemas de símbolos: alfabeto poligonal, alfabeto ptongal, maneras y
prosodia; traducción de palabras del billar a esqueletos de fonos.
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

import config
from exception import InventoryError, PhoneticsError
from geometry import SideLabel
from models import PhthongRecord

_logger = logging.getLogger(__name__)


class Place(str, Enum):
    PAL = "PAL"
    VUP = "VUP"
    GLOTTAL = "Glottal"


class Manner(str, Enum):
    VOWEL = "A"
    GLOTTAL_STOP = "C"
    PLOSIVE = "P"
    FRICATIVE = "F"
    NASAL = "M"
    APPROXIMANT = "V"
    SEMIVOWEL = "H"
    CLOSURE = "□"

    @property
    def continuant(self) -> bool:
        return self in _CONTINUANTS


_CONTINUANTS = frozenset({Manner.VOWEL, Manner.FRICATIVE, Manner.NASAL, Manner.CLOSURE})


class FrontBack(str, Enum):
    """Eje anterior/posterior; los valores primados son la mitad PAL de la simetría."""
    BACK_P = "Back′"
    BACK_LIKE_P = "BackLike′"
    CENTRAL_P = "Central′"
    FRONT_LIKE_P = "FrontLike′"
    FRONT_P = "Front′"
    FRONT = "Front"
    FRONT_LIKE = "FrontLike"
    CENTRAL = "Central"
    BACK_LIKE = "BackLike"
    BACK = "Back"

    @property
    def rank(self) -> int:
        return list(FrontBack).index(self)

    @property
    def primed(self) -> bool:
        return self.value.endswith("′")

    def mirrored(self) -> "FrontBack":
        """Coordenada espejo respecto a la línea de simetría rota."""
        return FrontBack(self.value[:-1] if self.primed else self.value + "′")


class OpenClose(str, Enum):
    CLOSE = "close"
    CLOSE_LIKE = "closeLike"
    CLOSE_MID = "closeMid"
    MID = "mid"
    OPEN_MID = "openMid"
    OPEN_LIKE = "openLike"
    OPEN = "open"

    @property
    def rank(self) -> int:
        return list(OpenClose).index(self)


_COMPATIBLE = {
    Place.GLOTTAL: frozenset({Manner.VOWEL, Manner.GLOTTAL_STOP, Manner.SEMIVOWEL, Manner.CLOSURE}),
    Place.PAL: frozenset({Manner.FRICATIVE, Manner.PLOSIVE, Manner.APPROXIMANT, Manner.NASAL, Manner.CLOSURE}),
    Place.VUP: frozenset({Manner.FRICATIVE, Manner.PLOSIVE, Manner.APPROXIMANT, Manner.NASAL, Manner.CLOSURE}),
}


def compatible(place: Place, manner: Manner) -> bool:
    return manner in _COMPATIBLE[place]


@dataclass(frozen=True)
class Phthong:
    symbol: str
    place: Place
    front_back: FrontBack
    open_close: OpenClose
    polygonal: bool = False
    provisional: bool = False
    asymmetric: bool = False

    @property
    def cell(self) -> tuple[Place, FrontBack, OpenClose]:
        return self.place, self.front_back, self.open_close

    @classmethod
    def from_record(cls, record: PhthongRecord) -> "Phthong":
        return cls(
            symbol=record.symbol,
            place=Place(record.place),
            front_back=FrontBack(record.front_back),
            open_close=OpenClose(record.open_close),
            polygonal=record.polygonal,
            provisional=record.provisional,
            asymmetric=record.asymmetric,
        )

    def to_record(self) -> PhthongRecord:
        return PhthongRecord(
            symbol=self.symbol,
            place=self.place.value,
            front_back=self.front_back.value,
            open_close=self.open_close.value,
            polygonal=self.polygonal,
            provisional=self.provisional,
            asymmetric=self.asymmetric,
        )


class Prosody(BaseModel):
    """
    Las seis dimensiones no simbólicas de un fono (diacríticos, sin semántica acústica).

    Attributes:
        rounding (float): Desviación de longitud del tracto en fracción de octava, |x| ≤ 1/3.
        loudness (float): dB relativos al piso local.
        duration (float | None): Segundos.
        voicing (int): Nivel de sonoridad; 0 sordo, 1 sonoro por defecto.
        pitch (float | None): Semitonos.
        nasality (bool): Nasalización.
    """
    model_config = ConfigDict(frozen=True)

    rounding: float = Field(default=0.0, ge=-1 / 3, le=1 / 3)
    loudness: float = 0.0
    duration: float | None = Field(default=None, gt=0)
    voicing: int = Field(default=1, ge=0)
    pitch: float | None = None
    nasality: bool = False


@dataclass(frozen=True)
class Phone:
    """
    Ptongo conjugado con una manera.

    Raises:
        PhoneticsError: Si la manera no es compatible con el lugar del ptongo.
    """
    phthong: Phthong
    manner: Manner
    prosody: Prosody | None = None

    def __post_init__(self):
        if not compatible(self.phthong.place, self.manner):
            raise PhoneticsError(
                f"La manera /{self.manner.value}/ no se conjuga con el lugar "
                f"{self.phthong.place.value} de [{self.phthong.symbol}]"
            )

    @property
    def place(self) -> Place:
        return self.phthong.place

    def __str__(self) -> str:
        return f"{self.phthong.symbol}/{self.manner.value}"


@dataclass(frozen=True)
class PhoneSkeleton:
    """Fono subdeterminado que deja un choque del billar: lugar y familia de maneras."""
    side: str
    place: Place
    slot: str
    manners: tuple[Manner, ...]


# ---------- INVENTARIO ----------
class Inventory:
    """Inventario inmutable de ptongos con búsqueda por símbolo y por celda."""

    def __init__(self, phthongs):
        self.phthongs = tuple(phthongs)
        self._by_symbol: dict[str, Phthong] = {}
        self._by_cell: dict[tuple, Phthong] = {}
        for ph in self.phthongs:
            if ph.symbol in self._by_symbol:
                raise InventoryError(f"Símbolo duplicado en el inventario: [{ph.symbol}]")
            if ph.cell in self._by_cell:
                other = self._by_cell[ph.cell]
                raise InventoryError(
                    f"[{ph.symbol}] y [{other.symbol}] ocupan la misma celda "
                    f"({ph.place.value}, {ph.front_back.value}, {ph.open_close.value})"
                )
            self._by_symbol[ph.symbol] = ph
            self._by_cell[ph.cell] = ph

    def __len__(self) -> int:
        return len(self.phthongs)

    def __iter__(self):
        return iter(self.phthongs)

    def __contains__(self, symbol) -> bool:
        return symbol in self._by_symbol

    def get(self, symbol: str) -> Phthong:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise PhoneticsError(f"Símbolo desconocido: [{symbol}]") from None

    def cell(self, place: Place, front_back: FrontBack, open_close: OpenClose) -> Phthong | None:
        """Ptongo de la celda, o None si está vacía."""
        return self._by_cell.get((Place(place), FrontBack(front_back), OpenClose(open_close)))

    def by_place(self, place: Place) -> list[Phthong]:
        return [ph for ph in self.phthongs if ph.place is Place(place)]

    def polygonal(self) -> list[Phthong]:
        return [ph for ph in self.phthongs if ph.polygonal]

    def phones(self, manner: Manner) -> list[Phone]:
        """Todos los fonos que produce una manera sobre el inventario."""
        manner = Manner(manner)
        return [Phone(ph, manner) for ph in self.phthongs if compatible(ph.place, manner)]

    def mirror_violations(self) -> list[str]:
        """
        Ptongos PAL confirmados y simétricos sin contraparte VUP en la coordenada espejo.
        """
        missing = []
        for ph in self.by_place(Place.PAL):
            if ph.provisional or ph.asymmetric:
                continue
            if self.cell(Place.VUP, ph.front_back.mirrored(), ph.open_close) is None:
                missing.append(ph.symbol)
        return missing


def load_inventory(path: str | Path | None = None) -> Inventory:
    """
    Carga y valida el inventario de ptongos.

    Args:
        path: Archivo JSON; por defecto el inventario del directorio de datos.

    Returns:
        Inventory: Inventario con todas las invariantes comprobadas.

    Raises:
        InventoryError: Archivo ilegible, lugar o coordenada desconocidos,
            símbolo repetido o celda ocupada dos veces.
    """
    path = Path(path) if path is not None else config.data_path(config.INVENTORY_FILE)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InventoryError(f"No existe el inventario {path}") from None
    except json.JSONDecodeError as exc:
        raise InventoryError(f"Inventario ilegible {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise InventoryError("El inventario debe ser una lista de ptongos")
    try:
        records = [PhthongRecord.model_validate(item) for item in raw]
    except ValidationError as exc:
        raise InventoryError(f"Entrada de inventario inválida: {exc}") from exc
    inventory = Inventory(Phthong.from_record(r) for r in records)
    _logger.debug("Inventario cargado de %s: %d ptongos", path, len(inventory))
    return inventory


def serialize_inventory(inventory: Inventory) -> str:
    """Forma normal del archivo de inventario (UTF-8, sangría de 2, salto final)."""
    data = [ph.to_record().model_dump(by_alias=True) for ph in inventory]
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


# ---------- NOTACIÓN DE FONOS ----------
def parse_manner(token: str) -> Manner:
    try:
        return Manner(token)
    except ValueError:
        raise PhoneticsError(f"Manera desconocida: /{token}/") from None


def parse_phone(token: str, inventory: Inventory) -> Phone:
    symbol, sep, manner = token.rpartition("/")
    if not sep or not symbol:
        raise PhoneticsError(f"Fono mal formado '{token}': se espera símbolo/manera")
    return Phone(inventory.get(symbol), parse_manner(manner))


def parse_phones(text: str, inventory: Inventory) -> list[Phone]:
    """'θ/P a/A' → [Phone(θ, P), Phone(a, A)]."""
    return [parse_phone(token, inventory) for token in text.split()]


def format_phones(phones) -> str:
    return " ".join(str(ph) for ph in phones)


# ---------- PUENTE CON EL BILLAR ----------
_SIDE_PLACE = {
    SideLabel.DENTAL.value: Place.PAL,
    SideLabel.PALATAL.value: Place.PAL,
    SideLabel.LABIAL.value: Place.PAL,
    SideLabel.VELAR_PALATAL.value: Place.VUP,
    SideLabel.VELAR.value: Place.VUP,
    SideLabel.UVULAR.value: Place.VUP,
    SideLabel.GLOTTAL.value: Place.GLOTTAL,
}

_VOWEL_SLOT = (Manner.VOWEL, Manner.SEMIVOWEL)
_CONSONANT_SLOT = (Manner.FRICATIVE, Manner.PLOSIVE, Manner.APPROXIMANT, Manner.NASAL)


def side_to_place(side) -> Place:
    try:
        return _SIDE_PLACE[str(side)]
    except KeyError:
        raise PhoneticsError(f"'{side}' no pertenece al alfabeto poligonal") from None


def word_to_skeleton(word) -> list[PhoneSkeleton]:
    """
    Choques con la mandíbula → hueco vocálico; con los lados superiores (o la
    esquina ϕ) → hueco consonántico con su lugar. El ptongo queda sin resolver.
    """
    skeleton = []
    for symbol in word:
        place = side_to_place(symbol)
        if place is Place.GLOTTAL:
            skeleton.append(PhoneSkeleton(str(symbol), place, "vowel", _VOWEL_SLOT))
        else:
            skeleton.append(PhoneSkeleton(str(symbol), place, "consonant", _CONSONANT_SLOT))
    return skeleton
