"""
Gramática de la sílaba como sistema de transiciones entre maneras: validación,
silabificación y generación de secuencias admisibles.

Cada transición entre fonos consecutivos usa un arco (manera origen, manera
destino, dirección). Las transiciones entre fonos de la misma manera son
autolazos 'level'; las rachas de una misma manera forman un nodo. Un nodo
alcanzado por un arco 'up' y abandonado por uno 'down' es silábico; uno
alcanzado por 'down' y abandonado por 'up' es frontera de sílaba. El inicio de
la secuencia cuenta como 'up' entrante y el final como 'down' saliente.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from exception import ConfigError, GrammarError
from models import ArcRecord
from phonetics import Inventory, Manner, Phone, compatible, load_inventory, parse_manner

_logger = logging.getLogger(__name__)

_END = "end"


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"
    LEVEL = "level"


class Role(str, Enum):
    ONSET = "onset"
    SYLLABIC = "syllabic"
    CODA = "coda"
    BOUNDARY = "boundary"


_NOT_SYLLABIC = frozenset({Manner.PLOSIVE, Manner.CLOSURE})
_NOT_BOUNDARY = frozenset({Manner.VOWEL, Manner.GLOTTAL_STOP, Manner.PLOSIVE})


@dataclass(frozen=True)
class GrammarArc:
    """
    Arco de la gramática.

    Attributes:
        from_ (Manner): Manera origen.
        to (Manner): Manera destino.
        direction (Direction): 'up', 'down' o 'level' (sólo autolazos).
        homorganic (bool): Exige el mismo ptongo.
        diphthongal (bool): Permite cambiar de ptongo.
    """
    from_: Manner
    to: Manner
    direction: Direction
    homorganic: bool = False
    diphthongal: bool = False

    def __post_init__(self):
        if self.homorganic and self.diphthongal:
            raise GrammarError(0, "un arco no puede ser homorgánico y diptongal a la vez")
        if (self.direction is Direction.LEVEL) != (self.from_ is self.to):
            raise GrammarError(0, "sólo los autolazos son arcos 'level'")

    @property
    def kind(self) -> str:
        if self.homorganic:
            return "homorganic"
        return "diphthongal" if self.diphthongal else "plain"

    def admits(self, a: Phone, b: Phone) -> bool:
        """¿Admite el arco el paso del fono a al fono b?"""
        same = a.phthong.symbol == b.phthong.symbol
        if self.direction is Direction.LEVEL and same and not self.from_.continuant:
            return False
        if self.homorganic:
            return same
        if self.diphthongal:
            return True
        # arco llano: mismo ptongo o cambio de lugar, nunca otro ptongo del mismo lugar
        return same or a.place is not b.place

    def to_record(self) -> ArcRecord:
        return ArcRecord(
            from_=self.from_.value,
            to=self.to.value,
            direction=self.direction.value,
            homorganic=self.homorganic,
            diphthongal=self.diphthongal,
        )


class Grammar:
    """Conjunto inmutable de arcos indexado por (origen, destino, dirección)."""

    def __init__(self, arcs):
        self.arcs = tuple(arcs)
        self._index: dict[tuple, GrammarArc] = {}
        self._out: dict[Manner, set[Direction]] = {m: set() for m in Manner}
        self._in: dict[Manner, set[Direction]] = {m: set() for m in Manner}
        for arc in self.arcs:
            self._index.setdefault((arc.from_, arc.to, arc.direction), arc)
            if arc.direction is not Direction.LEVEL:
                self._out[arc.from_].add(arc.direction)
                self._in[arc.to].add(arc.direction)

    def __len__(self) -> int:
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    def arc(self, from_: Manner, to: Manner, direction: Direction) -> GrammarArc | None:
        return self._index.get((Manner(from_), Manner(to), Direction(direction)))

    def self_loop(self, manner: Manner) -> GrammarArc | None:
        return self.arc(manner, manner, Direction.LEVEL)

    def directions_out(self, manner: Manner) -> frozenset:
        return frozenset(self._out[Manner(manner)])

    def directions_in(self, manner: Manner) -> frozenset:
        return frozenset(self._in[Manner(manner)])

    def diphthongal_arcs(self) -> list[GrammarArc]:
        return [a for a in self.arcs if a.diphthongal]

    def role_ok(self, manner: Manner, incoming: str, outgoing: str) -> bool:
        """
        ¿Puede un nodo de esta manera entrar por `incoming` y salir por `outgoing`?
        `incoming` es 'up' o 'down'; `outgoing` además puede ser 'end'.
        """
        if outgoing == _END:
            if Direction.DOWN not in self._out[manner]:
                return False
            outgoing = Direction.DOWN.value
        if incoming == Direction.UP.value and outgoing == Direction.DOWN.value:
            return manner not in _NOT_SYLLABIC
        if incoming == Direction.DOWN.value and outgoing == Direction.UP.value:
            return manner not in _NOT_BOUNDARY
        return True


# ---------- GRAMÁTICA POR DEFECTO ----------
_UP, _DOWN = Direction.UP, Direction.DOWN
_BOTH = frozenset({_UP, _DOWN})

# Direcciones de entrada y salida por manera: la vocal sólo entra subiendo y sale
# bajando; la oclusiva y la glotal no tienen arcos entrantes de bajada.
_IN = {
    Manner.VOWEL: frozenset({_UP}),
    Manner.GLOTTAL_STOP: frozenset({_UP}),
    Manner.PLOSIVE: frozenset({_UP}),
    Manner.CLOSURE: _BOTH,
    Manner.FRICATIVE: _BOTH,
    Manner.NASAL: _BOTH,
    Manner.APPROXIMANT: _BOTH,
    Manner.SEMIVOWEL: _BOTH,
}
_OUT = {
    Manner.VOWEL: frozenset({_DOWN}),
    Manner.GLOTTAL_STOP: _BOTH,
    Manner.PLOSIVE: frozenset({_UP}),
    Manner.CLOSURE: _BOTH,
    Manner.FRICATIVE: _BOTH,
    Manner.NASAL: _BOTH,
    Manner.APPROXIMANT: _BOTH,
    Manner.SEMIVOWEL: _BOTH,
}

# H↔V: la aproximante sube hacia la semivocal y la semivocal baja hacia la aproximante
_GLIDE_ARCS = {
    (Manner.APPROXIMANT, Manner.SEMIVOWEL): _UP,
    (Manner.SEMIVOWEL, Manner.APPROXIMANT): _DOWN,
}

# Arcos que salen de /V/ o /H/ hacia una entrada de colisión del mismo ptongo
_COLLISION_ENTRIES = {
    Manner.APPROXIMANT: frozenset({Manner.FRICATIVE, Manner.PLOSIVE, Manner.NASAL}),
    Manner.SEMIVOWEL: frozenset({Manner.VOWEL, Manner.GLOTTAL_STOP}),
}

_HOMORGANIC_LOOPS = (Manner.VOWEL, Manner.FRICATIVE, Manner.NASAL)
_DIPHTHONGAL_LOOPS = (Manner.CLOSURE, Manner.SEMIVOWEL, Manner.APPROXIMANT)


def _kind(a: Manner, b: Manner) -> tuple[bool, bool]:
    if (a, b) in _GLIDE_ARCS:
        return False, True
    if Manner.CLOSURE in (a, b):
        return True, False
    for x, y in ((a, b), (b, a)):
        if y in _COLLISION_ENTRIES.get(x, ()):
            return True, False
    return False, False


@lru_cache(maxsize=1)
def build_default_grammar() -> Grammar:
    """
    Conjunto maximal de arcos compatible con las restricciones de la sílaba:

    - la vocal /A/ sólo tiene arcos entrantes 'up' y salientes 'down';
    - /P/ y /C/ no tienen arcos entrantes 'down';
    - los arcos que tocan /□/ son cambios de fase homorgánicos;
    - los únicos arcos diptongales son /V/→/H/, /H/→/V/ y los autolazos de
      /H/, /V/ y /□/;
    - /A/, /F/ y /M/ tienen autolazo homorgánico; /C/ y /P/ no tienen autolazo.
    """
    arcs = []
    for a in Manner:
        for b in Manner:
            if a is b:
                continue
            if (a, b) in _GLIDE_ARCS:
                directions = [_GLIDE_ARCS[(a, b)]]
            else:
                directions = [d for d in (_UP, _DOWN) if d in _OUT[a] and d in _IN[b]]
            homorganic, diphthongal = _kind(a, b)
            arcs.extend(GrammarArc(a, b, d, homorganic, diphthongal) for d in directions)
    arcs.extend(GrammarArc(m, m, Direction.LEVEL, homorganic=True) for m in _HOMORGANIC_LOOPS)
    arcs.extend(GrammarArc(m, m, Direction.LEVEL, diphthongal=True) for m in _DIPHTHONGAL_LOOPS)
    return Grammar(arcs)


def load_grammar(path: str | Path) -> Grammar:
    """
    Lee un archivo de arcos que reemplaza la gramática por defecto.

    Raises:
        ConfigError: Si el archivo no existe o algún arco es inválido.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        records = [ArcRecord.model_validate(item) for item in raw]
    except FileNotFoundError:
        raise ConfigError(f"No existe el archivo de gramática {path}") from None
    except (json.JSONDecodeError, TypeError, ValidationError) as exc:
        raise ConfigError(f"Archivo de gramática inválido {path}: {exc}") from exc
    grammar = Grammar(
        GrammarArc(Manner(r.from_), Manner(r.to), Direction(r.direction), r.homorganic, r.diphthongal)
        for r in records
    )
    _logger.debug("Gramática cargada de %s: %d arcos", path, len(grammar))
    return grammar


def dump_grammar(grammar: Grammar) -> str:
    data = [arc.to_record().model_dump(by_alias=True) for arc in grammar]
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


# ---------- ANÁLISIS ----------
@dataclass(frozen=True)
class SyllableParse:
    """
    Una sílaba del análisis. Los índices son posiciones de token; `span` es
    [inicio, fin) y comparte con la sílaba vecina el nodo frontera.
    """
    span: tuple[int, int]
    onset: tuple[int, ...]
    syllabic: int
    nucleus: tuple[int, ...]
    coda: tuple[int, ...]
    boundaries: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "span": list(self.span),
            "onset": list(self.onset),
            "syllabic": self.syllabic,
            "nucleus": list(self.nucleus),
            "coda": list(self.coda),
            "boundaries": list(self.boundaries),
        }


@dataclass(frozen=True)
class Syllabification:
    roles: tuple[Role, ...]
    directions: tuple[Direction, ...]
    syllabics: tuple[int, ...]
    boundaries: tuple[int, ...]
    syllables: tuple[SyllableParse, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "roles": [r.value for r in self.roles],
            "directions": [d.value for d in self.directions],
            "syllabics": list(self.syllabics),
            "boundaries": list(self.boundaries),
            "syllables": [s.to_dict() for s in self.syllables],
        }


@dataclass(frozen=True)
class _Run:
    start: int
    end: int
    manner: Manner


def _transition_candidates(tokens, grammar: Grammar) -> list[list[Direction]]:
    """Direcciones admisibles para cada transición i (del token i-1 al i)."""
    candidates = [[]]
    for i in range(1, len(tokens)):
        a, b = tokens[i - 1], tokens[i]
        if a.manner is b.manner:
            loop = grammar.self_loop(a.manner)
            if loop is None:
                raise GrammarError(i, f"/{a.manner.value}/ no admite autotransiciones")
            if not loop.admits(a, b):
                if a.phthong.symbol == b.phthong.symbol:
                    reason = f"/{a.manner.value}/ no admite la autotransición del mismo fono {a}"
                else:
                    reason = f"{a} → {b}: cambio de ptongo fuera de un arco diptongal"
                raise GrammarError(i, reason)
            candidates.append([Direction.LEVEL])
            continue
        dirs = []
        for d in (Direction.UP, Direction.DOWN):
            arc = grammar.arc(a.manner, b.manner, d)
            if arc is not None and arc.admits(a, b):
                dirs.append(d)
        if not dirs:
            raise GrammarError(i, f"ningún arco admite {a} → {b}")
        candidates.append(dirs)
    return candidates


def _runs(tokens) -> list[_Run]:
    runs, start = [], 0
    for i in range(1, len(tokens) + 1):
        if i == len(tokens) or tokens[i].manner is not tokens[start].manner:
            runs.append(_Run(start, i, tokens[start].manner))
            start = i
    return runs


def _assign_directions(tokens, grammar: Grammar):
    """
    Asigna una dirección a cada transición entre nodos: alcanzabilidad hacia
    delante para localizar el primer error, factibilidad hacia atrás y elección
    voraz hacia delante (en subida prefiere 'up'; en bajada prefiere 'down',
    alargando la coda).
    """
    candidates = _transition_candidates(tokens, grammar)
    runs = _runs(tokens)
    outs = [[d.value for d in candidates[runs[r + 1].start]] for r in range(len(runs) - 1)] + [[_END]]

    reachable = {Direction.UP.value}
    for r, run in enumerate(runs):
        nxt = {o for i in reachable for o in outs[r] if grammar.role_ok(run.manner, i, o)}
        if not nxt:
            if r == len(runs) - 1:
                if run.manner is Manner.CLOSURE:
                    raise GrammarError(len(tokens) - 1, "la secuencia termina con una oclusión abierta")
                raise GrammarError(
                    len(tokens) - 1, f"la secuencia no puede terminar en /{run.manner.value}/"
                )
            raise GrammarError(
                runs[r + 1].start,
                f"/{run.manner.value}/ en {tokens[run.start]} no puede ocupar ningún papel silábico",
            )
        reachable = nxt

    feasible = [set() for _ in runs]
    for r in range(len(runs) - 1, -1, -1):
        for i in (Direction.UP.value, Direction.DOWN.value):
            for o in outs[r]:
                if grammar.role_ok(runs[r].manner, i, o) and (o == _END or o in feasible[r + 1]):
                    feasible[r].add(i)

    chosen, current = [], Direction.UP.value
    for r, run in enumerate(runs):
        options = [
            o for o in outs[r]
            if grammar.role_ok(run.manner, current, o) and (o == _END or o in feasible[r + 1])
        ]
        out = current if current in options else options[0]
        chosen.append((current, out))
        current = Direction.DOWN.value if out == _END else out
    return runs, chosen


def _role(incoming: str, outgoing: str) -> Role:
    outgoing = Direction.DOWN.value if outgoing == _END else outgoing
    if incoming == Direction.UP.value:
        return Role.SYLLABIC if outgoing == Direction.DOWN.value else Role.ONSET
    return Role.CODA if outgoing == Direction.DOWN.value else Role.BOUNDARY


def syllabify(tokens, grammar: Grammar | None = None) -> Syllabification:
    """
    Marca cada fono como ataque, silábico, coda o frontera.

    Raises:
        GrammarError: En el primer índice con una transición inadmisible.
    """
    tokens = list(tokens)
    if not tokens:
        raise GrammarError(0, "secuencia vacía")
    grammar = grammar or build_default_grammar()
    runs, chosen = _assign_directions(tokens, grammar)

    roles: list[Role] = []
    directions: list[Direction] = []
    for run, (incoming, outgoing) in zip(runs, chosen):
        if run.start > 0:
            directions.append(Direction(incoming))
        directions.extend([Direction.LEVEL] * (run.end - run.start - 1))
        roles.extend([_role(incoming, outgoing)] * (run.end - run.start))

    syllables = []
    left_boundary = None
    peaks = [k for k, run in enumerate(runs) if roles[run.start] is Role.SYLLABIC]
    if not peaks:
        raise GrammarError(len(tokens) - 1, "la secuencia no tiene silábico")
    for n, k in enumerate(peaks):
        stop = peaks[n + 1] if n + 1 < len(peaks) else len(runs)
        right = next((j for j in range(k + 1, stop) if roles[runs[j].start] is Role.BOUNDARY), None)
        first = 0 if left_boundary is None else left_boundary
        last = len(runs) if right is None else right + 1
        onset = tuple(
            i for j in range(first, k) if roles[runs[j].start] is Role.ONSET
            for i in range(runs[j].start, runs[j].end)
        )
        coda = tuple(
            i for j in range(k + 1, last) if roles[runs[j].start] is Role.CODA
            for i in range(runs[j].start, runs[j].end)
        )
        edges = tuple(runs[j].start for j in (left_boundary, right) if j is not None)
        syllables.append(SyllableParse(
            span=(runs[first].start, runs[last - 1].end),
            onset=onset,
            syllabic=runs[k].start,
            nucleus=tuple(range(runs[k].start, runs[k].end)),
            coda=coda,
            boundaries=edges,
        ))
        left_boundary = right

    return Syllabification(
        roles=tuple(roles),
        directions=tuple(directions),
        syllabics=tuple(s.syllabic for s in syllables),
        boundaries=tuple(runs[j].start for j in range(len(runs)) if roles[runs[j].start] is Role.BOUNDARY),
        syllables=tuple(syllables),
    )


def validate(tokens, grammar: Grammar | None = None) -> list[SyllableParse]:
    """
    Análisis determinista de izquierda a derecha.

    Args:
        tokens: Secuencia no vacía de fonos.
        grammar (Grammar | None): Gramática; por defecto la maximal.

    Returns:
        list[SyllableParse]: Sílabas que cubren todos los fonos.

    Raises:
        GrammarError: Índice y motivo de la primera transición inadmisible, de
            una secuencia sin silábico o de una oclusión abierta al final.
    """
    return list(syllabify(tokens, grammar).syllables)


# ---------- GENERACIÓN ----------
_PLAN = {
    Role.ONSET: (Direction.UP.value, Direction.UP.value),
    Role.SYLLABIC: (Direction.UP.value, Direction.DOWN.value),
    Role.CODA: (Direction.DOWN.value, Direction.DOWN.value),
    Role.BOUNDARY: (Direction.DOWN.value, Direction.UP.value),
}


def _phone_pools(inventory: Inventory) -> dict[Manner, list[Phone]]:
    return {
        m: [Phone(ph, m) for ph in inventory if compatible(ph.place, m) and not ph.provisional]
        for m in Manner
    }


def _draw_syllable(rng, grammar: Grammar, pools, prev: Phone | None, last: bool) -> list[Phone] | None:
    n_onset = int(rng.integers(0, 3))
    n_coda = int(rng.integers(0, 3)) if last else int(rng.integers(1, 3))
    plan = [Role.ONSET] * n_onset + [Role.SYLLABIC]
    extend = bool(rng.random() < 0.2)
    plan += [Role.CODA] * (n_coda if last else n_coda - 1)
    if not last:
        plan.append(Role.BOUNDARY)

    phones: list[Phone] = []
    for pos, role in enumerate(plan):
        incoming, outgoing = _PLAN[role]
        if last and pos == len(plan) - 1:
            outgoing = _END
        if role is Role.SYLLABIC:
            manners = [Manner.VOWEL]
        else:
            manners = [m for m in Manner if m is not Manner.VOWEL]
        before = phones[-1] if phones else prev
        options = []
        for m in manners:
            if before is not None and m is before.manner:
                continue
            if not grammar.role_ok(m, incoming, outgoing):
                continue
            if before is None:
                options.extend(pools[m])
                continue
            arc = grammar.arc(before.manner, m, Direction(incoming))
            if arc is not None:
                options.extend(ph for ph in pools[m] if arc.admits(before, ph))
        if not options:
            return None
        phones.append(options[int(rng.integers(len(options)))])
        if role is Role.SYLLABIC and extend:
            phones.append(phones[-1])
    return phones


def generate(
    rng_seed: int = 0,
    syllable_count: int = 1,
    inventory: Inventory | None = None,
    grammar: Grammar | None = None,
    max_tries: int = 200,
) -> list[Phone]:
    """
    Recorrido aleatorio sobre los arcos que produce `syllable_count` sílabas,
    cada una con su núcleo vocálico; determinista para una semilla dada.

    Raises:
        GrammarError: Si con esta gramática no se encuentra una sílaba admisible.
    """
    if syllable_count < 0:
        raise GrammarError(0, "el número de sílabas no puede ser negativo")
    grammar = grammar or build_default_grammar()
    inventory = inventory or load_inventory()
    pools = _phone_pools(inventory)
    rng = np.random.default_rng(rng_seed)

    tokens: list[Phone] = []
    for k in range(syllable_count):
        last = k == syllable_count - 1
        prev = tokens[-1] if tokens else None
        for _ in range(max_tries):
            syllable = _draw_syllable(rng, grammar, pools, prev, last)
            if syllable is not None:
                tokens.extend(syllable)
                break
        else:
            raise GrammarError(len(tokens), "no se encontró una sílaba admisible con esta gramática")

    if tokens:
        count = len(validate(tokens, grammar))
        if count != syllable_count:
            raise GrammarError(len(tokens) - 1, f"se generaron {count} sílabas en lugar de {syllable_count}")
    _logger.debug("Generadas %d sílabas (%d fonos) con semilla %d", syllable_count, len(tokens), rng_seed)
    return tokens


# ---------- PUENTE CON EL BILLAR ----------
@dataclass(frozen=True)
class CandidateParse:
    """Secuencia de fonos candidata para una palabra del billar y su análisis."""
    phones: tuple[Phone, ...]
    syllables: tuple[SyllableParse, ...] | None
    error: GrammarError | None = None

    @property
    def valid(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        data = {"phones": [str(p) for p in self.phones], "valid": self.valid}
        if self.syllables is not None:
            data["syllables"] = [s.to_dict() for s in self.syllables]
        if self.error is not None:
            data["error"] = {"index": self.error.index, "reason": self.error.reason}
        return data


def cxc_to_phones(units, manners, inventory: Inventory | None = None, grammar: Grammar | None = None) -> CandidateParse:
    """
    Convierte una palabra del billar (o sus unidades CXC) en fonos del alfabeto
    poligonal con las maneras dadas y comprueba si la secuencia es admisible.

    Args:
        units: Unidades de `dynamics.cxc_units` o directamente la palabra.
        manners: Una manera por símbolo ('P', 'A', ...).

    Raises:
        PhoneticsError: Si alguna manera no es compatible con el lugar del lado.
        GrammarError: Si el número de maneras no coincide con la palabra.
    """
    units = list(units)
    if units and hasattr(units[0], "first"):
        word = [units[0].first] + [u.second for u in units]
    else:
        word = [str(s) for s in units]
    manners = list(manners)
    if len(manners) != len(word):
        raise GrammarError(0, f"se esperaban {len(word)} maneras y llegaron {len(manners)}")
    inventory = inventory or load_inventory()
    phones = tuple(
        Phone(inventory.get(symbol), m if isinstance(m, Manner) else parse_manner(m))
        for symbol, m in zip(word, manners)
    )
    try:
        return CandidateParse(phones, tuple(validate(phones, grammar)))
    except GrammarError as exc:
        return CandidateParse(phones, None, exc)
