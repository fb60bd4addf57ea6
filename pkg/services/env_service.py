"""
Servicio del entorno MDP
Observación, espacio de 8 acciones, recompensa éxito-menos-coste y bucle de
episodio a 10 Hz durante 400 s.
"""

import logging
import math

import numpy as np

from config.run_config import RunConfig
from models.env_models import Action, CostTable, Observation, Trace, Transition
from models.link_models import LinkKind
from models.mobility_models import RelGeometry, Track, VehicleState
from services.channel_service import combined_success, link_probabilities
from services.mobility_service import build_serpentine, initial_vehicles, relative_geometry, step_vehicles
from utils.errors import ConfigurationError, ContractViolation
from utils.rng import STREAM_CHANNEL, STREAM_MOBILITY, make_rng

logger = logging.getLogger(__name__)

# =============================================================================
# FUNCIONES PURAS
# =============================================================================

def observe(geom: RelGeometry, R: float) -> Observation:
    """
    Construye s = [X, Y, cos(phi), sin(phi)].
    
    Args:
        geom: Geometría transmisor (seguidor) → receptor (líder)
        R: Alcance de normalización (m), > 0
    
    Returns:
        Observation: X, Y = posición del receptor en el marco del transmisor / R
            (recortadas a [-1, 1]); phi = dirección del transmisor en el marco del receptor
    """
    if R <= 0:
        raise ContractViolation(f"R debe ser positivo (recibido {R})")
    x_rel = geom.distance * math.cos(geom.bearing_tx)
    y_rel = geom.distance * math.sin(geom.bearing_tx)
    return Observation(
        X=min(max(x_rel / R, -1.0), 1.0),
        Y=min(max(y_rel / R, -1.0), 1.0),
        cos_phi=math.cos(geom.bearing_rx),
        sin_phi=math.sin(geom.bearing_rx),
    )


def action_cost(action: Action, costs: CostTable) -> float:
    """C(a): suma de los costes de los enlaces de la acción"""
    return sum(costs.link_cost(kind) for kind in Action(action).links)


def action_probability(action: Action, probs: dict[LinkKind, float]) -> float:
    """p(s, a): éxito combinado de los enlaces de la acción"""
    return combined_success(probs[kind] for kind in Action(action).links)


def reward_bounds(costs: CostTable) -> tuple[float, float]:
    """[-C(a8), 1]"""
    return -action_cost(Action.A8, costs), 1.0

# =============================================================================
# ENTORNO
# =============================================================================

class HandoverEnv:
    """
    Entorno de handover vertical con dos vehículos en un serpentín.
    
    La dinámica no depende de la acción: la movilidad y el sorteo de Bernoulli
    consumen sus propios flujos aleatorios en cada paso sea cual sea la acción.
    """

    def __init__(self, config: RunConfig | None = None):
        self.config = config or RunConfig()
        self._tracks: dict[int, Track] = {}
        self.track: Track | None = None
        self.leader: VehicleState | None = None
        self.follower: VehicleState | None = None
        self.scenario_id: int | None = None
        self.steps = 0
        self._obs: Observation | None = None
        self._geom: RelGeometry | None = None
        self._mobility_rng: np.random.Generator | None = None
        self._channel_rng: np.random.Generator | None = None
        env = self.config.environment
        self._airtime_ms = {
            LinkKind.DSRC: 8_000.0 * env.packet_bytes / env.bitrate_dsrc,
            LinkKind.VLC_HEADLIGHT: 8_000.0 * env.packet_bytes / env.bitrate_vlc,
            LinkKind.VLC_TAILLIGHT: 8_000.0 * env.packet_bytes / env.bitrate_vlc,
        }

    @property
    def horizon(self) -> int:
        return self.config.environment.horizon

    @property
    def done(self) -> bool:
        return self.steps >= self.horizon

    @property
    def geometry(self) -> RelGeometry:
        return self._geom

    def get_track(self, scenario_id: int) -> Track:
        """Circuito del escenario (se construye una vez y se comparte)"""
        if scenario_id not in self._tracks:
            self._tracks[scenario_id] = build_serpentine(scenario_id, self.config.track)
        return self._tracks[scenario_id]

    def reset(self, scenario_id: int | None = None, seed: int = 0) -> Observation:
        """
        Reconstruye circuito y vehículos y devuelve la primera observación.
        
        Args:
            scenario_id: 1 o 2 (por defecto el de la configuración)
            seed: Semilla del episodio
        
        Raises:
            ConfigurationError: Escenario desconocido
        """
        scenario_id = self.config.scenario if scenario_id is None else scenario_id
        if scenario_id not in (1, 2):
            raise ConfigurationError(f"Escenario desconocido: {scenario_id}")
        self.scenario_id = scenario_id
        self.track = self.get_track(scenario_id)
        self._mobility_rng = make_rng(seed, STREAM_MOBILITY)
        self._channel_rng = make_rng(seed, STREAM_CHANNEL)
        self.leader, self.follower = initial_vehicles(self.track, self.config.mobility, self._mobility_rng)
        self.steps = 0
        self._geom = relative_geometry(self.follower, self.leader)
        self._obs = observe(self._geom, self.config.environment.max_range)
        return self._obs

    def step(self, action: Action | int) -> Transition:
        """
        Ejecuta un paso de dt segundos.
        
        La recompensa realizada es 1[éxito] - C(a), con éxito ~ Bernoulli(p(s, a));
        su esperanza es p(s, a) - C(a).
        
        Raises:
            ContractViolation: Episodio terminado o sin reset
        """
        if self._obs is None:
            raise ContractViolation("step() antes de reset()")
        if self.done:
            raise ContractViolation("step() sobre un episodio terminado")
        action = Action(action)
        geom = self._geom
        probs = link_probabilities(geom, self.config.channels)
        p = action_probability(action, probs)
        success = bool(self._channel_rng.random() < p)
        reward = (1.0 if success else 0.0) - action_cost(action, self.config.costs)

        if not self.config.environment.frozen_mobility:
            self.leader, self.follower = step_vehicles(
                self.track, self.leader, self.follower,
                self.config.environment.dt, self._mobility_rng, self.config.mobility,
            )
            self._geom = relative_geometry(self.follower, self.leader)
        obs = self._obs
        self._obs = observe(self._geom, self.config.environment.max_range)
        info = {
            "step": self.steps,
            "p_dsrc": probs[LinkKind.DSRC],
            "p_head": probs[LinkKind.VLC_HEADLIGHT],
            "p_tail": probs[LinkKind.VLC_TAILLIGHT],
            "p_action": p,
            "success": success,
            "distance": geom.distance,
            "bearing_tx": geom.bearing_tx,
            "bearing_rx": geom.bearing_rx,
            "airtime_ms": sum(self._airtime_ms[k] for k in action.links),
        }
        self.steps += 1
        return Transition(obs=obs, action=action, reward=reward, next_obs=self._obs, done=self.done, info=info)


def run_policy_episode(env: HandoverEnv, policy, scenario_id: int | None = None, seed: int = 0) -> Trace:
    """
    Ejecuta un episodio completo con una política voraz (greedy_action(obs) -> índice).
    
    Returns:
        Trace: Secuencia de transiciones del episodio
    """
    obs = env.reset(scenario_id, seed)
    trace = Trace()
    while not env.done:
        action = Action.from_index(policy.greedy_action(obs.to_array()))
        transition = env.step(action)
        trace.append(transition)
        obs = transition.next_obs
    return trace
