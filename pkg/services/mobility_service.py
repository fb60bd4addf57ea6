"""
Servicio de movilidad
Genera los serpentines cerrados de los escenarios 1 y 2 y avanza el par
líder-seguidor sobre ellos.
"""

import logging
import math

import numpy as np

from config.run_config import MobilityConfig, TrackConfig
from models.mobility_models import KMH_TO_MS, RelGeometry, Track, VehicleState
from utils.errors import ConfigurationError, ContractViolation

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTRUCCIÓN DEL CIRCUITO
# =============================================================================

def _primitive_poses(start_xy: np.ndarray, heading: float, curvature: float, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Poses a lo largo de una recta (curvatura 0) o de un arco de curvatura constante"""
    if curvature == 0.0:
        xy = start_xy + np.outer(s, [math.cos(heading), math.sin(heading)])
        return xy, np.full_like(s, heading)
    theta = heading + curvature * s
    xy = np.column_stack((
        start_xy[0] + (np.sin(theta) - math.sin(heading)) / curvature,
        start_xy[1] - (np.cos(theta) - math.cos(heading)) / curvature,
    ))
    return xy, theta


def _validate_geometry(scenario_id: int, cfg: TrackConfig) -> int:
    if scenario_id not in cfg.hairpin_counts:
        raise ConfigurationError(f"Escenario desconocido: {scenario_id}")
    if cfg.segment_length <= 0:
        raise ConfigurationError(f"segment_length debe ser positivo (recibido {cfg.segment_length})")
    if cfg.hairpin_radius <= 0:
        raise ConfigurationError(f"hairpin_radius debe ser positivo (recibido {cfg.hairpin_radius})")
    if cfg.resolution <= 0:
        raise ConfigurationError(f"resolution debe ser positiva (recibido {cfg.resolution})")
    if 1.0 / cfg.hairpin_radius > cfg.max_curvature:
        raise ConfigurationError(
            f"La curvatura 1/{cfg.hairpin_radius} supera el máximo configurado {cfg.max_curvature}"
        )
    hairpins = cfg.hairpin_counts[scenario_id]
    # El lazo se cierra por el lado izquierdo solo si la última recta vuelve hacia x = 0
    if hairpins < 1 or hairpins % 2 == 0:
        raise ConfigurationError(f"El número de horquillas debe ser impar y >= 1 (recibido {hairpins})")
    return hairpins


def build_serpentine(scenario_id: int, geometry_cfg: TrackConfig) -> Track:
    """
    Construye un serpentín cerrado: rectas paralelas unidas por horquillas de
    media vuelta, y un tramo de retorno (dos cuartos de vuelta y una recta).
    
    Args:
        scenario_id: 1 (pocas horquillas) o 2 (muchas horquillas)
        geometry_cfg: Longitud de recta, radio, horquillas por escenario y resolución
    
    Returns:
        Track: Polilínea determinista para la configuración dada
    
    Raises:
        ConfigurationError: Geometría degenerada o escenario desconocido
    """
    hairpins = _validate_geometry(scenario_id, geometry_cfg)
    length = geometry_cfg.segment_length
    radius = geometry_cfg.hairpin_radius
    kappa = 1.0 / radius

    # (longitud, curvatura con signo)
    primitives: list[tuple[float, float]] = []
    for i in range(hairpins):
        primitives.append((length, 0.0))
        primitives.append((math.pi * radius, kappa if i % 2 == 0 else -kappa))
    primitives.append((length, 0.0))
    primitives.append((math.pi * radius / 2.0, kappa))
    primitives.append((2.0 * radius * hairpins - 2.0 * radius, 0.0))
    primitives.append((math.pi * radius / 2.0, kappa))
    primitives = [p for p in primitives if p[0] > 0.0]

    total = sum(p[0] for p in primitives)
    s_grid = np.arange(0.0, total, geometry_cfg.resolution)
    s_grid = s_grid[s_grid < total - 1e-9]

    points = np.empty((len(s_grid) + 1, 2))
    start_xy = np.zeros(2)
    heading = 0.0
    offset = 0.0
    for seg_len, curvature in primitives:
        mask = (s_grid >= offset) & (s_grid < offset + seg_len)
        if mask.any():
            xy, _ = _primitive_poses(start_xy, heading, curvature, s_grid[mask] - offset)
            points[:-1][mask] = xy
        end_xy, end_heading = _primitive_poses(start_xy, heading, curvature, np.array([seg_len]))
        start_xy, heading = end_xy[0], float(end_heading[0])
        offset += seg_len
    # Lazo cerrado: el último punto coincide con el primero
    points[-1] = points[0]
    arc_length = np.append(s_grid, total)

    logger.debug(f"Serpentín escenario {scenario_id}: {hairpins} horquillas, {total:.1f} m, {len(arc_length)} puntos")
    points.setflags(write=False)
    arc_length.setflags(write=False)
    return Track(points=points, arc_length=arc_length, hairpin_count=hairpins, scenario_id=scenario_id)


def count_hairpins(track: Track, curvature_threshold: float = 0.01, min_turn: float = 0.9 * math.pi) -> int:
    """
    Cuenta los tramos curvos contiguos cuyo giro acumulado supera min_turn.
    
    Los cuartos de vuelta del retorno quedan separados por una recta y no cuentan.
    """
    delta = np.diff(track.points, axis=0)
    headings = np.arctan2(delta[:, 1], delta[:, 0])
    turns = np.angle(np.exp(1j * np.diff(headings)))
    ds = np.diff(track.arc_length)[1:]
    curved = np.abs(turns / ds) > curvature_threshold

    count = 0
    accumulated = 0.0
    for is_curved, turn in zip(curved, turns):
        if is_curved:
            accumulated += turn
            continue
        if abs(accumulated) >= min_turn:
            count += 1
        accumulated = 0.0
    if abs(accumulated) >= min_turn:
        count += 1
    return count

# =============================================================================
# VEHÍCULOS
# =============================================================================

def vehicle_at(track: Track, arc_position: float, speed: float) -> VehicleState:
    """Estado de un vehículo coherente con el eje en arc_position"""
    s = arc_position % track.length
    xy, heading = track.pose_at(s)
    return VehicleState(arc_position=float(s), x=float(xy[0]), y=float(xy[1]), heading=float(heading), speed=float(speed))


def initial_vehicles(track: Track, cfg: MobilityConfig, rng: np.random.Generator) -> tuple[VehicleState, VehicleState]:
    """Seguidor en el origen, líder start_gap metros por delante, velocidades uniformes"""
    v_min, v_max = cfg.speed_min_kmh * KMH_TO_MS, cfg.speed_max_kmh * KMH_TO_MS
    leader_speed, follower_speed = rng.uniform(v_min, v_max, size=2)
    leader = vehicle_at(track, cfg.start_gap, leader_speed)
    follower = vehicle_at(track, 0.0, follower_speed)
    return leader, follower


def arc_gap(track: Track, leader: VehicleState, follower: VehicleState) -> float:
    """Distancia curvilínea del seguidor al líder (lazo cerrado)"""
    return (leader.arc_position - follower.arc_position) % track.length


def step_vehicles(
    track: Track,
    leader: VehicleState,
    follower: VehicleState,
    dt: float,
    rng: np.random.Generator,
    cfg: MobilityConfig | None = None,
) -> tuple[VehicleState, VehicleState]:
    """
    Avanza el par un paso de dt segundos.
    
    Cada vehículo avanza speed·dt; el líder se limita para no superar max_gap
    y el seguidor para conservar min_gap. Las velocidades siguen un paseo
    aleatorio acotado a [speed_min, speed_max].
    
    Args:
        track: Circuito cerrado
        leader: Estado del líder
        follower: Estado del seguidor
        dt: Paso temporal (s), > 0
        rng: Flujo aleatorio de movilidad
        cfg: Parámetros de velocidad y separación
    
    Returns:
        tuple: (leader, follower) tras el paso
    """
    if dt <= 0:
        raise ContractViolation(f"dt debe ser positivo (recibido {dt})")
    cfg = cfg or MobilityConfig()
    v_min, v_max = cfg.speed_min_kmh * KMH_TO_MS, cfg.speed_max_kmh * KMH_TO_MS

    gap = arc_gap(track, leader, follower)
    leader_adv = leader.speed * dt
    follower_adv = follower.speed * dt
    if gap + leader_adv - follower_adv > cfg.max_gap:
        leader_adv = max(0.0, cfg.max_gap - gap + follower_adv)
    follower_adv = min(follower_adv, max(0.0, gap + leader_adv - cfg.min_gap))

    noise = rng.normal(0.0, cfg.speed_noise, size=2) if cfg.speed_noise > 0 else np.zeros(2)
    leader_speed = float(np.clip(leader.speed + noise[0], v_min, v_max))
    follower_speed = float(np.clip(follower.speed + noise[1], v_min, v_max))

    return (
        vehicle_at(track, leader.arc_position + leader_adv, leader_speed),
        vehicle_at(track, follower.arc_position + follower_adv, follower_speed),
    )

# =============================================================================
# GEOMETRÍA RELATIVA
# =============================================================================

def wrap_angle(angle: float) -> float:
    """Envuelve un ángulo en (-pi, pi]"""
    return math.pi - ((math.pi - angle) % (2.0 * math.pi))


def relative_geometry(tx: VehicleState, rx: VehicleState) -> RelGeometry:
    """
    Distancia y rumbos relativos entre transmisor y receptor.
    
    Args:
        tx: Vehículo transmisor
        rx: Vehículo receptor
    
    Returns:
        RelGeometry: Posiciones coincidentes dan (0, 0, 0) por convención
    """
    dx, dy = rx.x - tx.x, rx.y - tx.y
    distance = math.hypot(dx, dy)
    if distance < 1e-12:
        return RelGeometry(0.0, 0.0, 0.0)
    bearing_tx = wrap_angle(math.atan2(dy, dx) - tx.heading)
    bearing_rx = wrap_angle(math.atan2(-dy, -dx) - rx.heading)
    return RelGeometry(distance, bearing_tx, bearing_rx)
