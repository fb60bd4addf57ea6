from dataclasses import dataclass
import math

import numpy as np

# =============================================================================
# CONSTANTES DE MOVILIDAD
# =============================================================================

KMH_TO_MS = 1000.0 / 3600.0

# Velocidades de 30 a 40 km/h
SPEED_MIN_MS = 30.0 * KMH_TO_MS
SPEED_MAX_MS = 40.0 * KMH_TO_MS

# =============================================================================
# TIPOS DE DOMINIO
# =============================================================================

@dataclass(frozen=True, eq=False)
class Track:
    """Serpentín cerrado muestreado como polilínea densa"""
    points: np.ndarray       # (N, 2) metros
    arc_length: np.ndarray   # (N,) longitud de arco acumulada, estrictamente creciente
    hairpin_count: int
    scenario_id: int

    @property
    def length(self) -> float:
        """Longitud total del circuito cerrado"""
        return float(self.arc_length[-1])

    def pose_at(self, arc_position: float) -> tuple[np.ndarray, float]:
        """
        Interpola linealmente la posición y el rumbo en una abscisa curvilínea.
        
        Args:
            arc_position: Metros a lo largo del eje (se envuelve módulo la longitud)
        
        Returns:
            tuple: (xy, heading)
        """
        s = arc_position % self.length
        k = int(np.searchsorted(self.arc_length, s, side="right")) - 1
        k = min(max(k, 0), len(self.arc_length) - 2)
        p0, p1 = self.points[k], self.points[k + 1]
        s0, s1 = self.arc_length[k], self.arc_length[k + 1]
        t = (s - s0) / (s1 - s0)
        xy = p0 + t * (p1 - p0)
        heading = math.atan2(p1[1] - p0[1], p1[0] - p0[0])
        return xy, heading

    def to_rows(self) -> list[tuple[float, float, float]]:
        """Filas (x, y, arc_length) para el volcado CSV"""
        return [(float(x), float(y), float(s)) for (x, y), s in zip(self.points, self.arc_length)]


@dataclass(frozen=True)
class VehicleState:
    """Pose y velocidad de un vehículo sobre el circuito"""
    arc_position: float
    x: float
    y: float
    heading: float
    speed: float

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class RelGeometry:
    """Distancia y rumbos relativos entre transmisor y receptor"""
    distance: float
    bearing_tx: float  # dirección del receptor en el marco del transmisor
    bearing_rx: float  # dirección del transmisor en el marco del receptor
