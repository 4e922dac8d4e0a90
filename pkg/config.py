import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent

# Directorio de datos versionados (polígono canónico, inventario de ptongos)
DATA_DIR = Path(os.getenv("ORAL_BILLIARDS_DATA", str(BASE_DIR / "data")))

DATABASE_URL = os.getenv("ORAL_BILLIARDS_DB_URL", "sqlite:///./orbit_catalog.db")

LOG_LEVEL = os.getenv("ORAL_BILLIARDS_LOG_LEVEL", "INFO").upper()

DEFAULT_POLYGON_FILE = "oral_polygon.json"
INVENTORY_FILE = "phthongs.json"

# Escala del polígono canónico: longitud de la mandíbula en cm
DEFAULT_SCALE = 8.0
MIN_SCALE = 6.0
MAX_SCALE = 10.0

# Tolerancias (relativas al diámetro del polígono cuando se indica)
EPS_CORNER_REL = 1e-6
EPS_GRAZE = 1e-9
EPS_ANGLE = 1e-9
RECURRENCE_TOL_REL = 1e-7
RECURRENCE_TOL_ANGLE = 1e-7
MIN_ERODED_SIDE_RATIO = 0.05


def data_path(name: str) -> Path:
    """Ruta de un archivo dentro del directorio de datos."""
    return DATA_DIR / name
