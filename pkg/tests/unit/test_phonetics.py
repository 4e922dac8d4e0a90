"""
Tests unitarios de los sistemas de símbolos.

Incluye validaciones de:
- Inventario de ptongos versionado (forma normal, celdas, simetría espejo).
- Compatibilidad lugar/manera y construcción de fonos.
- Prosodia (modelo Pydantic).
- Notación de texto y esqueletos de palabras del billar.
"""

import json

import pytest
from pydantic import ValidationError

import config
from exception import InventoryError, PhoneticsError
from phonetics import (
    FrontBack,
    Inventory,
    Manner,
    OpenClose,
    Phone,
    Phthong,
    Place,
    Prosody,
    compatible,
    format_phones,
    load_inventory,
    parse_phones,
    serialize_inventory,
    side_to_place,
    word_to_skeleton,
)


# ---------- FIXTURES ----------
@pytest.fixture(scope="module")
def inventory():
    """Inventario versionado del directorio de datos."""
    return load_inventory()


def _write(tmp_path, records) -> str:
    path = tmp_path / "inv.json"
    path.write_text(json.dumps(records, ensure_ascii=False), encoding="utf-8")
    return str(path)


# ---------- INVENTARIO ----------
def test_inventory_file_is_in_normal_form(inventory):
    """Serializar el inventario cargado reproduce el archivo byte a byte."""
    raw = config.data_path(config.INVENTORY_FILE).read_text(encoding="utf-8")
    assert serialize_inventory(inventory) == raw


def test_polygonal_alphabet_in_inventory(inventory):
    symbols = {ph.symbol for ph in inventory.polygonal()}
    assert symbols == {"ϕ", "θ", "ç", "xⁱ", "x", "χ", "ʔ"}


def test_i_sits_on_front_seam(inventory):
    i = inventory.get("i")
    assert i.cell == (Place.GLOTTAL, FrontBack.FRONT, OpenClose.CLOSE)
    assert inventory.cell(Place.GLOTTAL, FrontBack.FRONT, OpenClose.CLOSE) is i


def test_schwa_sits_at_center(inventory):
    schwa = inventory.get("ə")
    assert schwa.place is Place.GLOTTAL
    assert schwa.front_back is FrontBack.CENTRAL
    assert schwa.open_close in (OpenClose.CLOSE_MID, OpenClose.MID)


def test_mirror_symmetry_holds(inventory):
    """Cada ptongo PAL confirmado y simétrico tiene su espejo VUP."""
    assert inventory.mirror_violations() == []


def test_duplicate_cell_raises(tmp_path):
    records = [
        {"symbol": "a", "place": "Glottal", "frontBack": "Central", "openClose": "open"},
        {"symbol": "ɐ", "place": "Glottal", "frontBack": "Central", "openClose": "open"},
    ]
    with pytest.raises(InventoryError):
        load_inventory(_write(tmp_path, records))


def test_duplicate_symbol_raises():
    a = Phthong("a", Place.GLOTTAL, FrontBack.CENTRAL, OpenClose.OPEN)
    b = Phthong("a", Place.GLOTTAL, FrontBack.BACK, OpenClose.OPEN)
    with pytest.raises(InventoryError):
        Inventory([a, b])


def test_unknown_coordinate_raises(tmp_path):
    records = [{"symbol": "a", "place": "Glottal", "frontBack": "Middle", "openClose": "open"}]
    with pytest.raises(InventoryError):
        load_inventory(_write(tmp_path, records))


def test_missing_inventory_raises(tmp_path):
    with pytest.raises(InventoryError):
        load_inventory(tmp_path / "nada.json")


def test_mirrored_coordinate():
    assert FrontBack.FRONT.mirrored() is FrontBack.FRONT_P
    assert FrontBack.BACK_LIKE_P.mirrored() is FrontBack.BACK_LIKE
    assert FrontBack.CENTRAL.primed is False


# ---------- MANERAS ----------
@pytest.mark.parametrize("place", list(Place))
@pytest.mark.parametrize("manner", list(Manner))
def test_compatibility_table(place, manner):
    glottal_only = {Manner.VOWEL, Manner.GLOTTAL_STOP, Manner.SEMIVOWEL}
    consonantal = {Manner.FRICATIVE, Manner.PLOSIVE, Manner.APPROXIMANT, Manner.NASAL}
    if manner is Manner.CLOSURE:
        expected = True
    elif place is Place.GLOTTAL:
        expected = manner in glottal_only
    else:
        expected = manner in consonantal
    assert compatible(place, manner) is expected


def test_continuant_manners():
    assert {m for m in Manner if m.continuant} == {Manner.VOWEL, Manner.FRICATIVE, Manner.NASAL, Manner.CLOSURE}


def test_incompatible_phone_raises(inventory):
    with pytest.raises(PhoneticsError):
        Phone(inventory.get("θ"), Manner.VOWEL)


def test_phones_of_manner(inventory):
    vowels = inventory.phones(Manner.VOWEL)
    assert vowels
    assert all(ph.place is Place.GLOTTAL for ph in vowels)


# ---------- PROSODIA ----------
def test_prosody_defaults():
    p = Prosody()
    assert p.voicing == 1
    assert p.rounding == 0.0
    assert p.nasality is False


@pytest.mark.parametrize("field, value", [("rounding", 0.5), ("duration", 0.0), ("voicing", -1)])
def test_prosody_out_of_range(field, value):
    with pytest.raises(ValidationError):
        Prosody(**{field: value})


# ---------- NOTACIÓN ----------
def test_parse_and_format_phones(inventory):
    phones = parse_phones("θ/P a/A", inventory)
    assert [ph.manner for ph in phones] == [Manner.PLOSIVE, Manner.VOWEL]
    assert phones[0].place is Place.PAL
    assert format_phones(phones) == "θ/P a/A"


def test_parse_closure_manner(inventory):
    (phone,) = parse_phones("θ/□", inventory)
    assert phone.manner is Manner.CLOSURE


@pytest.mark.parametrize("text", ["θ", "θ/Z", "q/A", "/A"])
def test_parse_invalid_phone_raises(inventory, text):
    with pytest.raises(PhoneticsError):
        parse_phones(text, inventory)


# ---------- PUENTE CON EL BILLAR ----------
@pytest.mark.parametrize(
    "side, place",
    [("θ", Place.PAL), ("ç", Place.PAL), ("ϕ", Place.PAL), ("xⁱ", Place.VUP), ("χ", Place.VUP), ("ʔ", Place.GLOTTAL)],
)
def test_side_to_place(side, place):
    assert side_to_place(side) is place


def test_side_to_place_unknown_raises():
    with pytest.raises(PhoneticsError):
        side_to_place("a")


def test_word_to_skeleton_fagnano_word():
    skeleton = word_to_skeleton(["θ", "ʔ", "χ"])
    assert [(s.slot, s.place) for s in skeleton] == [
        ("consonant", Place.PAL),
        ("vowel", Place.GLOTTAL),
        ("consonant", Place.VUP),
    ]
    assert Manner.VOWEL in skeleton[1].manners
    assert Manner.FRICATIVE in skeleton[0].manners


def test_word_to_skeleton_edge_cases():
    assert word_to_skeleton([]) == []
    assert [s.slot for s in word_to_skeleton(["ʔ", "ʔ"])] == ["vowel", "vowel"]
