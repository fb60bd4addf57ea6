"""
Escritura determinista de los artefactos de salida (CSV y JSON).
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

# Esquemas fijos de los CSV
CURVE_COLUMNS = ["episode", "return"]
AGGREGATE_CURVE_COLUMNS = ["episode", "mean", "ci_half_width"]
DECISION_MAP_COLUMNS = ["distance", "bearing", "action_id"]
OVERLAP_COLUMNS = ["distance", "bearing", "actions"]
TRACK_COLUMNS = ["x", "y", "arc_length"]
PROBE_COLUMNS = ["distance", "angle", "p_dsrc", "p_head", "p_tail"]
FLOAT_FORMAT = "%.10g"


def write_csv(rows: pd.DataFrame | Iterable[dict], path: str | Path, columns: Sequence[str] | None = None) -> Path:
    """
    Escribe un CSV con columnas en orden fijo.
    
    Args:
        rows: DataFrame o iterable de diccionarios
        path: Archivo de destino
        columns: Orden de columnas (obligatorio para esquemas fijos)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    if columns is not None:
        frame = frame.reindex(columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"CSV escrito: {path} ({len(frame)} filas)")
    return path


def read_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path)


def to_jsonable(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    if isinstance(payload, (list, tuple)):
        return [to_jsonable(item) for item in payload]
    if isinstance(payload, dict):
        return {str(k): to_jsonable(v) for k, v in payload.items()}
    return payload


def write_json(payload: Any, path: str | Path) -> Path:
    """JSON con claves ordenadas e indentación fija (salida reproducible)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
