"""
Servicio de canales
Modelos paramétricos de probabilidad de éxito por enlace (DSRC, faro VLC,
piloto VLC) y combinación redundante.
"""

import logging
import math
from typing import Iterable

import numpy as np
from scipy.special import expit

from models.link_models import BeamConfig, ChannelConfig, DsrcConfig, LinkKind
from models.mobility_models import RelGeometry
from services.mobility_service import wrap_angle
from utils.errors import ContractViolation

logger = logging.getLogger(__name__)


def _clamp(p: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return float(min(max(p, lo), hi))

# =============================================================================
# DSRC
# =============================================================================

def dsrc_success(geom: RelGeometry, cfg: ChannelConfig) -> float:
    """
    Éxito DSRC: logístico en la distancia, nulo más allá del alcance máximo.
    Omnidireccional (independiente de los rumbos).
    """
    dsrc: DsrcConfig = cfg.dsrc
    if geom.distance > dsrc.max_range:
        p = 0.0
    else:
        p = float(expit(-dsrc.steepness * (geom.distance - dsrc.range_50)))
    return _clamp(p, dsrc.clamp)

# =============================================================================
# VLC
# =============================================================================

def radial_gain(distance: float, beam: BeamConfig) -> float:
    """max(0, 1 - (d / max_range)^rolloff)"""
    return max(0.0, 1.0 - (distance / beam.max_range) ** beam.rolloff)


def beam_gain(angle: float, beam: BeamConfig) -> float:
    """
    Patrón angular asimétrico: 1 dentro de [-half_angle_right, +half_angle_left],
    borde coseno hasta 0 en taper radianes fuera del haz.
    """
    if -beam.half_angle_right <= angle <= beam.half_angle_left:
        return 1.0
    excess = angle - beam.half_angle_left if angle > 0 else -beam.half_angle_right - angle
    if beam.taper <= 0 or excess >= beam.taper:
        return 0.0
    return 0.5 * (1.0 + math.cos(math.pi * excess / beam.taper))


def fov_gain(offset: float, beam: BeamConfig) -> float:
    """El receptor ve al transmisor dentro de rx_fov de su eje"""
    return 1.0 if abs(offset) <= beam.rx_fov else 0.0


def vlc_headlight_success(geom: RelGeometry, cfg: ChannelConfig) -> float:
    """
    Éxito del faro delantero del seguidor hacia el líder.
    
    El haz apunta según el rumbo del transmisor; el receptor debe ver al
    transmisor por su eje trasero (bearing_rx cerca de pi).
    """
    beam = cfg.headlight
    p = (
        radial_gain(geom.distance, beam)
        * beam_gain(geom.bearing_tx, beam)
        * fov_gain(wrap_angle(geom.bearing_rx - math.pi), beam)
    )
    return _clamp(p, beam.clamp)


def vlc_taillight_success(geom: RelGeometry, cfg: ChannelConfig) -> float:
    """
    Éxito del piloto trasero: mismo modelo con el haz centrado en bearing_tx = pi
    y el receptor mirando hacia delante.
    """
    beam = cfg.taillight
    p = (
        radial_gain(geom.distance, beam)
        * beam_gain(wrap_angle(geom.bearing_tx - math.pi), beam)
        * fov_gain(geom.bearing_rx, beam)
    )
    return _clamp(p, beam.clamp)


LINK_MODELS = {
    LinkKind.DSRC: dsrc_success,
    LinkKind.VLC_HEADLIGHT: vlc_headlight_success,
    LinkKind.VLC_TAILLIGHT: vlc_taillight_success,
}


def link_probabilities(geom: RelGeometry, cfg: ChannelConfig) -> dict[LinkKind, float]:
    """Probabilidad de éxito de los tres enlaces para una geometría"""
    return {kind: model(geom, cfg) for kind, model in LINK_MODELS.items()}

# =============================================================================
# REDUNDANCIA
# =============================================================================

def combined_success(link_probs: Iterable[float]) -> float:
    """
    Éxito de una transmisión redundante con enlaces independientes: 1 - prod(1 - p_i).
    
    Raises:
        ContractViolation: Alguna probabilidad fuera de [0, 1]
    """
    failure = 1.0
    for p in link_probs:
        if not (0.0 <= p <= 1.0):
            raise ContractViolation(f"Probabilidad fuera de [0, 1]: {p}")
        failure *= 1.0 - p
    return 1.0 - failure

# =============================================================================
# SONDEO (channel-probe)
# =============================================================================

def probe_grid(cfg: ChannelConfig, distances: np.ndarray, angles: np.ndarray) -> list[dict]:
    """
    Barre p(d, phi) por enlace con receptor alineado (bearing_rx = pi para el faro,
    0 para el piloto) y phi como rumbo del receptor en el marco del transmisor.
    """
    rows = []
    for d in distances:
        for phi in angles:
            phi = float(phi)
            ahead = RelGeometry(float(d), phi, wrap_angle(phi + math.pi))
            behind = RelGeometry(float(d), wrap_angle(phi + math.pi), wrap_angle(phi))
            rows.append({
                "distance": float(d),
                "angle": phi,
                "p_dsrc": dsrc_success(ahead, cfg),
                "p_head": vlc_headlight_success(ahead, cfg),
                "p_tail": vlc_taillight_success(behind, cfg),
            })
    return rows
