import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from src.utils.errors import DatasetError

logger = logging.getLogger(__name__)

DATE_COLUMNS = ("date", "fecha", "Date", "Fecha")


@dataclass(frozen=True, eq=False)
class Dataset:
    columns: tuple[str, ...]
    values: np.ndarray
    dates: Optional[pd.Series] = None

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def read_dataset(path: Path) -> Dataset:
    """
    Lee un CSV con encabezado (UTF-8, decimal '.').
    Una columna de fechas opcional se preserva aparte; el resto debe ser numérico y completo.
    """
    path = Path(path)
    logger.info(f"Cargando datos desde {path}...")
    try:
        df = pd.read_csv(path, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DatasetError(f"No se pudo leer {path}: {e}") from e

    date_col = next((c for c in df.columns if c in DATE_COLUMNS), None)
    dates = df.pop(date_col) if date_col is not None else None
    if df.shape[1] == 0:
        raise DatasetError(f"{path} no tiene columnas numéricas")

    numeric = df.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1)
    if bad.any():
        # Línea 1 = encabezado
        lines = (np.flatnonzero(bad.to_numpy()) + 2).tolist()
        shown = ", ".join(str(n) for n in lines[:20])
        more = f" (y {len(lines) - 20} más)" if len(lines) > 20 else ""
        raise DatasetError(f"Valores faltantes o no numéricos en {path}, líneas: {shown}{more}")

    values = numeric.to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        raise DatasetError(f"Valores no finitos en {path}")
    logger.info(f"Datos cargados: T={values.shape[0]}, d={values.shape[1]}")
    return Dataset(tuple(str(c) for c in numeric.columns), values, dates)


def write_matrix_csv(values: np.ndarray, path: Path, columns: Optional[list[str]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(np.asarray(values), columns=columns).to_csv(path, index=False)
    return path


def write_json(payload: Any, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, ensure_ascii=False)
    return path


def read_json(path: Path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetError(f"JSON inválido en {path} (línea {e.lineno}): {e.msg}") from e
