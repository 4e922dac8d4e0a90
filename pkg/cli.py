"""
Línea de comandos: simulate, orbits, stability, grammar y render.

Códigos de salida: 0 éxito, 1 secuencia de fonos inadmisible, 2 error de
configuración, 3 error de simulación, geometría, órbitas o estabilidad.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

import config
from database import Base, SessionLocal, engine
from dynamics import Termination, read_event_log, simulate, trajectory_points, write_event_log
from exception import ConfigError, GrammarError, OralBilliardsError, PhoneticsError
from geometry import build_default_polygon, load_polygon
from models import OrbitSearchConfig, RunConfig, StabilityConfig
from render import render_svg
from repositories import OrbitRepository
from services import GrammarService, OrbitService, SimulationService, StabilityService

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_GRAMMAR = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

DEFAULT_OUT = "out"
DEFAULT_INIT = {"init_fagnano": ["θ", "ʔ", "χ"]}


def _read_json(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"No existe el archivo de configuración {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Configuración ilegible {path}: {exc}") from exc


def _load_config(model, args, defaults: dict | None = None):
    """Lee el archivo, aplica los valores por defecto y las banderas de la línea de comandos."""
    data = dict(defaults or {})
    data.update(_read_json(args.config))
    overrides = {
        "seed": getattr(args, "seed", None),
        "max_events": getattr(args, "max_events", None),
        "period_max": getattr(args, "period_max", None),
        "eps_corner": getattr(args, "eps_corner", None),
        "jaw_hinge": getattr(args, "jaw_hinge", None),
        "out_dir": getattr(args, "out", None),
    }
    data.update({k: v for k, v in overrides.items() if v is not None and k in model.model_fields})
    if getattr(args, "velum_closed", False):
        data["velum_closed"] = True
    if getattr(args, "svg", False) and "svg" in model.model_fields:
        data["svg"] = True
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Configuración inválida: {exc}") from exc


def _write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path


# ---------- SUBCOMANDOS ----------
def cmd_simulate(args) -> int:
    cfg = _load_config(RunConfig, args, DEFAULT_INIT if args.config is None else None)
    outcome = SimulationService().run(cfg)
    out = Path(cfg.out_dir or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    write_event_log(outcome.trajectory, out / "events.jsonl")
    result = outcome.to_dict()
    _write_json(out / "word.json", {"word": result["word"], "cxc": result["cxc"], "termination": result["termination"]})
    if cfg.svg:
        render_svg(outcome.polygon, trajectory_points(outcome.trajectory), out / "trajectory.svg",
                   title=" ".join(outcome.word[:12]))
    print(" ".join(outcome.word))
    if outcome.trajectory.termination is Termination.ESCAPE_ERROR:
        _logger.error("La simulación terminó por error numérico: %s", outcome.trajectory.message)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_orbits(args) -> int:
    cfg = _load_config(OrbitSearchConfig, args)
    repository = None
    db = None
    if args.catalog:
        Base.metadata.create_all(bind=engine)
        db = SessionLocal()
        repository = OrbitRepository(db)
    try:
        polygon, orbits = OrbitService(repository).search(cfg)
    finally:
        if db is not None:
            db.close()
    out = Path(cfg.out_dir or DEFAULT_OUT)
    _write_json(out / "orbits.json", {"polygon": polygon.name, "orbits": [o.to_dict() for o in orbits]})
    if cfg.svg:
        paths = []
        for orbit in orbits:
            traj = simulate(polygon, orbit.initial_state(), max_events=orbit.period, eps_corner=cfg.eps_corner)
            paths.append(trajectory_points(traj))
        render_svg(polygon, paths, out / "orbits.svg", title=f"{len(orbits)} órbitas")
    for orbit in orbits:
        print(f"{orbit.period}\t{' '.join(orbit.word)}\t{orbit.closure_error:.3e}")
    return EXIT_OK


def cmd_stability(args) -> int:
    cfg = _load_config(StabilityConfig, args, DEFAULT_INIT if args.config is None else None)
    report = StabilityService().run(cfg)
    out = Path(cfg.out_dir or DEFAULT_OUT)
    _write_json(out / "report.json", report.to_dict())
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    print(f"kinematic_radius={report.kinematic_radius} geometric_radius={report.geometric_radius}")
    return EXIT_OK


def cmd_grammar(args) -> int:
    service = GrammarService()
    try:
        if args.action == "validate":
            data = {"syllables": [s.to_dict() for s in service.validate(args.phones)]}
        elif args.action == "syllabify":
            data = service.syllabify(args.phones).to_dict()
        else:
            data = {"phones": service.generate(args.seed if args.seed is not None else 0, args.count)}
    except GrammarError as exc:
        print(json.dumps({"error": {"index": exc.index, "reason": exc.reason}}, ensure_ascii=False))
        print(str(exc), file=sys.stderr)
        return EXIT_GRAMMAR
    except PhoneticsError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_GRAMMAR
    print(json.dumps(data, ensure_ascii=False))
    return EXIT_OK


def cmd_render(args) -> int:
    polygon = load_polygon(args.polygon) if args.polygon else build_default_polygon(args.scale)
    paths = []
    if args.events:
        try:
            events, _ = read_event_log(args.events)
        except FileNotFoundError:
            raise ConfigError(f"No existe el registro de eventos {args.events}") from None
        paths.append([(e["x"], e["y"]) for e in events])
    out = Path(args.out or DEFAULT_OUT) / "polygon.svg"
    render_svg(polygon, paths, out, title=polygon.name)
    print(out)
    return EXIT_OK


# ---------- PARSER ----------
def _add_common(parser):
    parser.add_argument("--config", help="archivo JSON de configuración")
    parser.add_argument("--seed", type=int, help="semilla")
    parser.add_argument("--out", help="directorio de salida")
    parser.add_argument("--jaw-hinge", type=float, dest="jaw_hinge", help="giro de la mandíbula (rad)")
    parser.add_argument("--velum-closed", action="store_true", dest="velum_closed", help="cerrar el velo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oral-billiards", description="Billar del polígono oral")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simula una trayectoria")
    _add_common(p)
    p.add_argument("--max-events", type=int, dest="max_events")
    p.add_argument("--eps-corner", type=float, dest="eps_corner")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("orbits", help="busca órbitas periódicas")
    _add_common(p)
    p.add_argument("--max-events", type=int, dest="period_max", help="período máximo buscado")
    p.add_argument("--eps-corner", type=float, dest="eps_corner")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--catalog", action="store_true", help="guarda el catálogo en la base de datos")
    p.set_defaults(handler=cmd_orbits)

    p = sub.add_parser("stability", help="radios de estabilidad")
    _add_common(p)
    p.add_argument("--eps-corner", type=float, dest="eps_corner")
    p.set_defaults(handler=cmd_stability)

    p = sub.add_parser("grammar", help="gramática de la sílaba")
    p.add_argument("action", choices=("validate", "syllabify", "generate"))
    p.add_argument("phones", nargs="?", default="", help="secuencia 'θ/P a/A'")
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(handler=cmd_grammar)

    p = sub.add_parser("render", help="dibuja el polígono y un registro de eventos")
    p.add_argument("--polygon", help="archivo JSON de polígono")
    p.add_argument("--scale", type=float, default=config.DEFAULT_SCALE)
    p.add_argument("--events", help="registro events.jsonl")
    p.add_argument("--out", help="directorio de salida")
    p.set_defaults(handler=cmd_render)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=config.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        _logger.error("%s", exc)
        return EXIT_CONFIG
    except OralBilliardsError as exc:
        _logger.error("%s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
