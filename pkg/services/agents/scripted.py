"""
Políticas de referencia sin aprendizaje: acción constante, heurística
geométrica y política miope que maximiza la recompensa esperada del paso
con los modelos de canal.
"""

import math

import numpy as np

from models.env_models import Action, CostTable
from models.link_models import ChannelConfig
from models.mobility_models import RelGeometry
from services.channel_service import link_probabilities, vlc_headlight_success
from services.env_service import action_cost, action_probability


class ConstantPolicy:
    """Siempre la misma acción (a1 nunca transmite, a8 usa los tres enlaces)"""

    def __init__(self, action: Action):
        self.action = Action(action)

    def greedy_action(self, obs: np.ndarray) -> int:
        return self.action.index

    select_action = greedy_action


def geometry_from_observation(obs: np.ndarray, max_range: float) -> RelGeometry:
    """Invierte la observación: distancia y rumbos a partir de [X, Y, cos, sin]"""
    x, y, c, s = (float(v) for v in obs)
    return RelGeometry(
        distance=math.hypot(x, y) * max_range,
        bearing_tx=math.atan2(y, x),
        bearing_rx=math.atan2(s, c),
    )


class MyopicPolicy:
    """argmax_a p(s, a) - C(a) con las probabilidades de enlace conocidas"""

    def __init__(self, channels: ChannelConfig, costs: CostTable, max_range: float):
        self.channels = channels
        self.costs = costs
        self.max_range = max_range

    def expected_rewards(self, obs: np.ndarray) -> np.ndarray:
        probs = link_probabilities(geometry_from_observation(obs, self.max_range), self.channels)
        return np.array([action_probability(a, probs) - action_cost(a, self.costs) for a in Action])

    def greedy_action(self, obs: np.ndarray) -> int:
        return int(np.argmax(self.expected_rewards(obs)))

    select_action = greedy_action


class HeuristicPolicy:
    """Faro delantero si el receptor cae en el haz y en alcance; DSRC en otro caso"""

    def __init__(self, channels: ChannelConfig, max_range: float, threshold: float = 0.5):
        self.channels = channels
        self.max_range = max_range
        self.threshold = threshold

    def greedy_action(self, obs: np.ndarray) -> int:
        geom = geometry_from_observation(obs, self.max_range)
        if vlc_headlight_success(geom, self.channels) >= self.threshold:
            return Action.A3.index
        return Action.A2.index

    select_action = greedy_action
