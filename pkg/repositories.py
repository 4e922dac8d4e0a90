# repositories.py
from sqlalchemy.orm import Session

from models import OrbitORM
from orbits import PeriodicOrbit


def orbit_to_row(orbit: PeriodicOrbit) -> dict:
    """Datos de fila para una órbita; la palabra se guarda en su forma cíclica canónica."""
    return {
        "polygon_name": orbit.polygon.name,
        "word": " ".join(orbit.canonical_word),
        "period": orbit.period,
        "anchor_side": orbit.anchor.side,
        "anchor_s": orbit.anchor.s,
        "anchor_angle": orbit.anchor.angle,
        "closure_error": orbit.closure_error,
    }


class OrbitRepository:
    def __init__(self, db: Session):
        self.db = db

    def save(self, orbit_data: dict) -> OrbitORM:
        """Guarda una fila del catálogo."""
        obj = OrbitORM(**orbit_data)
        self.db.add(obj)
        self.db.commit()
        self.db.refresh(obj)
        return obj

    def save_many(self, rows: list[dict]) -> list[OrbitORM]:
        """Guarda varias filas en una sola transacción."""
        objs = [OrbitORM(**row) for row in rows]
        self.db.add_all(objs)
        self.db.commit()
        for obj in objs:
            self.db.refresh(obj)
        return objs

    def get(self, orbit_id: int) -> OrbitORM | None:
        return self.db.get(OrbitORM, orbit_id)

    def list(self, limit: int = 10, offset: int = 0, polygon_name: str | None = None):
        """Catálogo paginado, opcionalmente filtrado por polígono."""
        query = self.db.query(OrbitORM)
        if polygon_name:
            query = query.filter(OrbitORM.polygon_name == polygon_name)
        return query.order_by(OrbitORM.period.asc(), OrbitORM.id.asc()).offset(offset).limit(limit).all()

    def search(self, word_contains: str, limit: int = 10, offset: int = 0):
        """Órbitas cuya palabra canónica contiene el texto dado."""
        return (
            self.db.query(OrbitORM)
            .filter(OrbitORM.word.contains(word_contains))
            .order_by(OrbitORM.period.asc(), OrbitORM.id.asc())
            .offset(offset)
            .limit(limit)
            .all()
        )

    def delete_all(self, polygon_name: str) -> int:
        """Borra el catálogo de un polígono; devuelve cuántas filas se borraron."""
        count = self.db.query(OrbitORM).filter(OrbitORM.polygon_name == polygon_name).delete()
        self.db.commit()
        return count
