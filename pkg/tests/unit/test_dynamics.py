"""
Tests unitarios del simulador de billar.

Incluye validaciones de:
- Reflexión especular y primer choque del rayo.
- Palabras simbólicas de órbitas conocidas (cuadrado, Fagnano, cuña).
- Invariancia de la palabra frente a la escala del polígono y la rapidez.
- Modo forzado: disipación, reforzamiento, umbral de energía (ρ = 0.3, 0.5, 0.7).
- Unidades CXC, bola finita y registro JSONL.
"""

import math

import numpy as np
import pytest

from dynamics import (
    BallSpec,
    BallState,
    CollisionEvent,
    CornerHit,
    DriveSpec,
    Termination,
    advance,
    cxc_units,
    read_event_log,
    reflect,
    simulate,
    simulate_driven,
    time_reversed_state,
    word_length_limit,
    write_event_log,
)
from exception import SimulationError
from geometry import OralPolygon, build_default_polygon, rescale
from orbits import fagnano_orbit

EPS = 1e-6


# ---------- FIXTURES ----------
@pytest.fixture
def square():
    return OralPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def oral():
    return build_default_polygon(8.0)


@pytest.fixture
def generic_start():
    """Arranque interior sin simetrías en el hexágono canónico."""
    return BallState.from_angle(3.1, 1.7, 0.731)


def _event(side: str, index: int = 0, flight: float = 1.0) -> CollisionEvent:
    return CollisionEvent(
        index=index, side=side, side_index=0, s=0.5, point=(0.0, 0.0),
        incoming_dir=(0.0, -1.0), outgoing_dir=(0.0, 1.0),
        speed_in=1.0, speed_out=1.0, flight_length=flight, time=float(index),
    )


# ---------- REFLEXIÓN ----------
@pytest.mark.parametrize(
    "d, n, expected",
    [
        ((1.0, 0.0), (-1.0, 0.0), (-1.0, 0.0)),
        ((0.6, -0.8), (0.0, 1.0), (0.6, 0.8)),
        ((math.sqrt(2) / 2, -math.sqrt(2) / 2), (0.0, 1.0), (math.sqrt(2) / 2, math.sqrt(2) / 2)),
    ],
)
def test_reflect(d, n, expected):
    np.testing.assert_allclose(reflect(d, n), expected, atol=1e-15)


def test_reflect_keeps_norm():
    out = reflect((0.28, -0.96), (0.0, 1.0))
    assert np.hypot(*out) == pytest.approx(1.0, abs=1e-12)


def test_reflect_outgoing_direction_raises():
    with pytest.raises(SimulationError):
        reflect((0.0, 1.0), (0.0, 1.0))


# ---------- PRIMER CHOQUE ----------
def test_advance_axis_aligned(square):
    event = advance(BallState((0.5, 0.5), (1.0, 0.0)), square, EPS)
    assert isinstance(event, CollisionEvent)
    assert event.side == "b"
    np.testing.assert_allclose(event.point, (1.0, 0.5), atol=1e-12)
    np.testing.assert_allclose(event.outgoing_dir, (-1.0, 0.0), atol=1e-12)
    assert event.flight_length == pytest.approx(0.5)


def test_advance_diagonal_hits_corner(square):
    d = (1 / math.sqrt(2), 1 / math.sqrt(2))
    hit = advance(BallState((0.5, 0.5), d), square, EPS)
    assert isinstance(hit, CornerHit)
    assert hit.vertex == 2
    assert set(hit.labels) == {"b", "c"}
    np.testing.assert_allclose(hit.point, (1.0, 1.0))


def test_advance_oblique_ray(square):
    d = np.array([1.0, 0.5]) / math.hypot(1.0, 0.5)
    event = advance(BallState((0.25, 0.5), (float(d[0]), float(d[1]))), square, EPS)
    assert event.side == "b"
    np.testing.assert_allclose(event.point, (1.0, 0.875), atol=1e-12)


def test_ball_state_requires_unit_direction():
    with pytest.raises(SimulationError):
        BallState((0.0, 0.0), (1.0, 1.0))


# ---------- PALABRAS ----------
@pytest.mark.parametrize("max_events", [1, 2, 7, 40])
def test_square_perpendicular_bounce(square, max_events):
    traj = simulate(square, BallState((0.5, 0.5), (1.0, 0.0)), max_events=max_events)
    expected = tuple("b" if i % 2 == 0 else "d" for i in range(max_events))
    assert traj.word == expected
    assert traj.termination is Termination.MAX_EVENTS


def test_fagnano_word_repeats():
    """Desde la órbita de Fagnano la palabra repite los tres lados durante 100 períodos."""
    tri = OralPolygon.from_points([(0, 0), (4, 0), (1.2, 2.8)])
    orbit = fagnano_orbit(tri)
    traj = simulate(tri, orbit.initial_state(), max_events=300)
    assert traj.termination is Termination.MAX_EVENTS
    cycle = orbit.word[1:] + orbit.word[:1]
    assert traj.word == cycle * 100


def test_wedge_alternates_then_hits_corner():
    """Entre dos lados casi paralelos la palabra alterna hasta alcanzar la esquina."""
    alpha = 0.01
    wedge = OralPolygon.from_points(
        [(0.0, 0.0), (10.0, 0.0), (10 * math.cos(alpha), 10 * math.sin(alpha))],
        ["a", "m", "b"],
    )
    # la recta y = h pasa a distancia h del vértice; los choques caen a h/sin(kα)
    h = 4.5e-5
    traj = simulate(wedge, BallState((5.0, h), (-1.0, 0.0)), max_events=50, eps_corner=1e-3)
    assert traj.termination is Termination.CORNER_HIT
    assert traj.corner.vertex == 0
    assert traj.word == ("b", "a", "b", "a", "b|a")


def test_empty_trajectory_has_empty_word(square):
    traj = simulate(square, BallState((0.5, 0.5), (1.0, 0.0)), max_events=0)
    assert traj.word == ()
    assert traj.events == ()


def test_start_outside_raises(square):
    with pytest.raises(SimulationError):
        simulate(square, BallState((2.0, 0.5), (1.0, 0.0)))


# ---------- INVARIANCIA ----------
def _random_starts(p: OralPolygon, count: int, seed: int = 3) -> list[BallState]:
    rng = np.random.default_rng(seed)
    lo, hi = p.points.min(axis=0), p.points.max(axis=0)
    starts = []
    while len(starts) < count:
        point = rng.uniform(lo, hi)
        if min(p.signed_distances(point)) > 0.05 * p.diameter:
            starts.append(BallState.from_angle(point[0], point[1], rng.uniform(0.0, 2 * math.pi)))
    return starts


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_word_invariant_under_rescale(oral, lam):
    scaled = rescale(oral, lam)
    for start in _random_starts(oral, 20):
        moved = BallState((start.position[0] * lam, start.position[1] * lam), start.direction)
        base = simulate(oral, start, max_events=50)
        other = simulate(scaled, moved, max_events=50)
        assert other.word == base.word


@pytest.mark.parametrize("speed", [0.1, 1.0, 10.0])
def test_word_invariant_under_speed(oral, speed):
    for start in _random_starts(oral, 20):
        fast = BallState(start.position, start.direction, speed)
        assert simulate(oral, fast, max_events=50).word == simulate(oral, start, max_events=50).word


# ---------- MODO FORZADO ----------
def test_conservative_drive_matches_simulate(oral, generic_start):
    base = simulate(oral, generic_start, max_events=60)
    driven = simulate_driven(oral, generic_start, BallSpec(), DriveSpec(), 60)
    assert driven.events == base.events


def test_energy_floor_after_fourth_collision(square):
    """ρ=0.5, v₀=1, umbral 0.1: rapideces 0.5, 0.25, 0.125, 0.0625."""
    drive = DriveSpec(restitution=0.5, speed_floor=0.1)
    traj = simulate_driven(square, BallState((0.5, 0.5), (1.0, 0.0)), drive=drive, max_events=50)
    assert traj.termination is Termination.ENERGY_FLOOR
    assert len(traj.events) == 4
    assert [e.speed_out for e in traj.events] == [0.5, 0.25, 0.125, 0.0625]
    assert word_length_limit(0.5, 1.0, 0.1) == 4


@pytest.mark.parametrize("rho, expected", [(0.3, 3), (0.7, 9)])
def test_energy_floor_matches_word_length_limit(oral, generic_start, rho, expected):
    drive = DriveSpec(restitution=rho, speed_floor=0.05)
    traj = simulate_driven(oral, generic_start, drive=drive, max_events=200)
    assert traj.termination is Termination.ENERGY_FLOOR
    assert word_length_limit(rho, 1.0, 0.05) == expected
    assert len(traj.events) == expected


def test_word_length_limit_without_dissipation():
    assert word_length_limit(1.0, 1.0, 0.1) is None


def test_dissipation_keeps_symbolic_word(oral, generic_start):
    """La dirección no depende de la rapidez: la palabra coincide con la conservativa."""
    base = simulate(oral, generic_start, max_events=80)
    drive = DriveSpec(restitution=0.5, reforce_speed=1.0)
    driven = simulate_driven(oral, generic_start, drive=drive, max_events=80)
    assert driven.word == base.word
    assert driven.events[-1].speed_out < base.events[-1].speed_out


def test_jitter_is_reproducible(oral, generic_start):
    drive = DriveSpec(reforce_speed=1.0, direction_jitter=0.02)
    a = simulate_driven(oral, generic_start, drive=drive, max_events=30, rng_seed=7)
    b = simulate_driven(oral, generic_start, drive=drive, max_events=30, rng_seed=7)
    assert a.events == b.events


def test_invalid_restitution_raises():
    with pytest.raises(SimulationError):
        DriveSpec(restitution=1.5)


# ---------- UNIDADES CXC ----------
def test_cxc_units_of_syllable():
    units = cxc_units([_event("x", 0), _event("ʔ", 1, 2.0), _event("θ", 2, 3.0)])
    assert [(u.first, u.second) for u in units] == [("x", "ʔ"), ("ʔ", "θ")]
    assert [u.flight_length for u in units] == [2.0, 3.0]
    assert [u.pattern for u in units] == ["C[ʔ]", "[ʔ]C"]
    assert all(u.in_syllable for u in units)


def test_cxc_units_pattern_count():
    units = cxc_units([_event(s, i) for i, s in enumerate(["θ", "ʔ", "θ", "ʔ"])])
    patterns = [u.pattern for u in units]
    assert patterns.count("C[ʔ]") == 2
    assert patterns.count("[ʔ]C") == 1


def test_cxc_units_single_collision_raises():
    with pytest.raises(SimulationError):
        cxc_units([_event("a")])


# ---------- BOLA FINITA ----------
def test_finite_ball_stays_at_radius(oral, generic_start):
    r = 0.4
    traj = simulate(oral, generic_start, BallSpec(radius=r), max_events=50)
    for e in traj.events:
        assert np.min(oral.signed_distances(e.point)) == pytest.approx(r, abs=1e-9)


def test_radius_schedule_changes_radius_at_collision(oral, generic_start):
    ball = BallSpec(radius=0.2, radius_schedule={5: 0.5})
    traj = simulate(oral, generic_start, ball, max_events=20)
    for e in traj.events[6:]:
        assert np.min(oral.signed_distances(e.point)) == pytest.approx(0.5, abs=1e-9)


# ---------- REVERSIBILIDAD Y REGISTRO ----------
def test_time_reversal_retraces_word(oral, generic_start):
    traj = simulate(oral, generic_start, max_events=20)
    back = simulate(oral, time_reversed_state(traj), max_events=19)
    assert back.word == tuple(reversed(traj.word[:-1]))


def test_event_log_roundtrip(tmp_path, oral, generic_start):
    traj = simulate(oral, generic_start, max_events=10)
    path = write_event_log(traj, tmp_path / "events.jsonl")
    events, termination = read_event_log(path)
    assert [e["side"] for e in events] == list(traj.word)
    assert termination == {"termination": "max_events", "events": 10}


def test_event_log_without_termination_raises(tmp_path):
    path = tmp_path / "events.jsonl"
    path.write_text('{"i": 0, "side": "a"}\n', encoding="utf-8")
    with pytest.raises(SimulationError):
        read_event_log(path)
