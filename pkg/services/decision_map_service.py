"""
Servicio de mapas de decisión
Acción voraz sobre una rejilla (distancia, rumbo) e informe de solape en
fronteras a partir de las visitas de una trayectoria.
"""

import json
import logging
import math
from typing import Optional

import numpy as np
import pandas as pd

from config.run_config import DecisionMapConfig
from models.env_models import Trace
from models.harness_models import DecisionMap, OverlapCell
from models.mobility_models import RelGeometry
from services.env_service import observe
from services.mobility_service import wrap_angle
from utils.io_utils import DECISION_MAP_COLUMNS, OVERLAP_COLUMNS

logger = logging.getLogger(__name__)


def grid_axes(cfg: DecisionMapConfig) -> tuple[np.ndarray, np.ndarray]:
    """Centros de celda: distancias en (0, distance_max], rumbos en [-pi, pi)"""
    step = cfg.distance_max / cfg.distance_bins
    distances = step * (np.arange(cfg.distance_bins) + 0.5)
    bearings = -math.pi + (2.0 * math.pi / cfg.bearing_bins) * (np.arange(cfg.bearing_bins) + 0.5)
    return distances, bearings


def cell_geometry(distance: float, bearing: float) -> RelGeometry:
    """
    Geometría de una celda con rumbos de marcha paralelos: si el receptor está
    en la dirección `bearing` del transmisor, éste queda en bearing + pi para el receptor.
    """
    return RelGeometry(distance=float(distance), bearing_tx=float(bearing), bearing_rx=wrap_angle(bearing + math.pi))


def _cell_index(value: float, low: float, width: float, bins: int) -> int:
    return min(max(int(math.floor((value - low) / width)), 0), bins - 1)


def boundary_overlap(trace: Trace, cfg: DecisionMapConfig, max_range: float) -> list[OverlapCell]:
    """
    Celdas donde dos visitas consecutivas de la trayectoria caen en la misma
    celda (distancia, rumbo) con acciones distintas.
    """
    d_width = cfg.distance_max / cfg.distance_bins
    b_width = 2.0 * math.pi / cfg.bearing_bins
    distances, bearings = grid_axes(cfg)
    visits = []
    for t in trace:
        distance = float(t.info.get("distance", math.hypot(t.obs.X, t.obs.Y) * max_range))
        if distance > cfg.distance_max:
            visits.append(None)
            continue
        bearing = math.atan2(t.obs.Y, t.obs.X)
        cell = (_cell_index(distance, 0.0, d_width, cfg.distance_bins), _cell_index(bearing, -math.pi, b_width, cfg.bearing_bins))
        visits.append((cell, int(t.action)))

    conflicts: dict[tuple[int, int], dict[int, int]] = {}
    for prev, cur in zip(visits[:-1], visits[1:]):
        if prev is None or cur is None or prev[0] != cur[0] or prev[1] == cur[1]:
            continue
        counts = conflicts.setdefault(cur[0], {})
        for _, action in (prev, cur):
            counts[action] = counts.get(action, 0) + 1
    return [
        OverlapCell(distance=float(distances[i]), bearing=float(bearings[j]), actions=dict(sorted(counts.items())))
        for (i, j), counts in sorted(conflicts.items())
    ]


def decision_map(policy, cfg: DecisionMapConfig, max_range: float, trace: Optional[Trace] = None) -> DecisionMap:
    """
    Barre la rejilla, construye la observación de cada celda y registra la
    acción voraz (ids 1..8).
    
    Args:
        policy: Objeto con greedy_action(obs) -> índice 0..7
        cfg: Rejilla
        max_range: Alcance de normalización de la observación
        trace: Trayectoria para el informe de solape (opcional)
    """
    distances, bearings = grid_axes(cfg)
    actions = [
        [int(policy.greedy_action(observe(cell_geometry(d, b), max_range).to_array())) + 1 for b in bearings]
        for d in distances
    ]
    overlap = boundary_overlap(trace, cfg, max_range) if trace is not None else []
    logger.info(f"Mapa de decisión {len(distances)}×{len(bearings)}; {len(overlap)} celdas con solape")
    return DecisionMap(distances=distances.tolist(), bearings=bearings.tolist(), actions=actions, overlap=overlap)


def map_frame(dmap: DecisionMap) -> pd.DataFrame:
    rows = [
        {"distance": d, "bearing": b, "action_id": dmap.actions[i][j]}
        for i, d in enumerate(dmap.distances)
        for j, b in enumerate(dmap.bearings)
    ]
    return pd.DataFrame(rows, columns=DECISION_MAP_COLUMNS)


def overlap_frame(dmap: DecisionMap) -> pd.DataFrame:
    rows = [
        {"distance": c.distance, "bearing": c.bearing, "actions": json.dumps(c.actions, sort_keys=True)}
        for c in dmap.overlap
    ]
    return pd.DataFrame(rows, columns=OVERLAP_COLUMNS)
