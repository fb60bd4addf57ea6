"""
Agente Rainbow DQN: memoria priorizada, retornos de n pasos, red dueling
distribucional con tronco compartido, exploración NoisyNet y pérdida de
proyección categórica con selección de acción doble.
"""

from dataclasses import dataclass
import logging
from typing import NamedTuple

import numpy as np

from models.agent_models import AgentKind, RainbowConfig
from models.env_models import N_ACTIONS, OBS_DIM
from services.agents.base import BaseAgent, net_seed
from services.agents.replay import Batch, NStepAccumulator, PrioritizedBuffer, StepRecord, per_sample
from services.nn import AdamState, DenseNet, DuelingHeadSpec, apply_gradients, backward, count_params, entropy, hard_update, log_softmax, softmax
from utils.errors import ContractViolation, TrainingDivergedError

logger = logging.getLogger(__name__)

# =============================================================================
# SOPORTE Y PROYECCIÓN
# =============================================================================

@dataclass(frozen=True)
class Support:
    """Rejilla fija de átomos z_i equiespaciados en [v_min, v_max]"""
    atoms: int
    v_min: float
    v_max: float

    def __post_init__(self):
        if self.atoms < 2:
            raise ContractViolation("Se requieren al menos 2 átomos")
        if self.v_min >= self.v_max:
            raise ContractViolation("v_min debe ser menor que v_max")

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.atoms)

    @property
    def delta(self) -> float:
        return (self.v_max - self.v_min) / (self.atoms - 1)

    @classmethod
    def from_config(cls, cfg: RainbowConfig, reward_range: tuple[float, float]) -> "Support":
        """[v_min, v_max] de la configuración, o derivado de las cotas de recompensa y gamma con derive_support"""
        if not cfg.derive_support:
            return cls(cfg.atoms, cfg.v_min, cfg.v_max)
        r_min, r_max = reward_range
        return cls(cfg.atoms, r_min / (1.0 - cfg.gamma), r_max / (1.0 - cfg.gamma))


def categorical_project(
    next_dist: np.ndarray,
    rewards: np.ndarray,
    gamma: np.ndarray | float,
    dones: np.ndarray,
    support: Support,
) -> np.ndarray:
    """
    Proyecta Tz_j = clamp(r + gamma (1 - done) z_j, v_min, v_max) sobre los
    átomos vecinos con interpolación lineal. Conserva la masa.
    
    Args:
        next_dist: (B, N) o (N,) distribución sobre átomos
        rewards, dones: (B,) o escalares
        gamma: Descuento (escalar o por muestra, p. ej. gamma^n)
    
    Returns:
        np.ndarray: Distribución proyectada de la misma forma que next_dist
    """
    next_dist = np.asarray(next_dist, dtype=np.float64)
    squeeze = next_dist.ndim == 1
    p = next_dist[None, :] if squeeze else next_dist
    batch = p.shape[0]
    rewards = np.broadcast_to(np.asarray(rewards, dtype=np.float64), (batch,))
    dones = np.broadcast_to(np.asarray(dones, dtype=np.float64), (batch,))
    gamma = np.broadcast_to(np.asarray(gamma, dtype=np.float64), (batch,))

    tz = np.clip(rewards[:, None] + (gamma * (1.0 - dones))[:, None] * support.z[None, :], support.v_min, support.v_max)
    b = np.clip((tz - support.v_min) / support.delta, 0.0, support.atoms - 1)
    snapped = np.rint(b)
    b = np.where(np.abs(b - snapped) < 1e-12, snapped, b)
    lower = np.floor(b).astype(np.int64)
    upper = np.ceil(b).astype(np.int64)
    same = (upper == lower).astype(np.float64)

    projected = np.zeros_like(p)
    rows = np.repeat(np.arange(batch), support.atoms).reshape(batch, support.atoms)
    np.add.at(projected, (rows, lower), p * (upper - b + same))
    np.add.at(projected, (rows, upper), p * (b - lower))
    return projected[0] if squeeze else projected

# =============================================================================
# RED DUELING DISTRIBUCIONAL
# =============================================================================

class RainbowNet:
    """Tronco 4→128 compartido; flujo de valor 128→128→N y de ventaja 128→128→8N"""

    def __init__(self, cfg: RainbowConfig, seed: int = 0):
        self.atoms = cfg.atoms
        stream_noisy = [cfg.noisy, cfg.noisy]
        self.trunk = DenseNet([OBS_DIM, cfg.trunk_width], ["relu"], seed=net_seed(seed, 0))
        self.value = DenseNet(
            [cfg.trunk_width, cfg.stream_width, cfg.atoms], ["relu", "identity"],
            noisy=stream_noisy, seed=net_seed(seed, 1), sigma0=cfg.noisy_sigma0,
        )
        self.advantage = DenseNet(
            [cfg.trunk_width, cfg.stream_width, N_ACTIONS * cfg.atoms], ["relu", "identity"],
            noisy=stream_noisy, seed=net_seed(seed, 2), sigma0=cfg.noisy_sigma0,
        )

    def networks(self) -> dict[str, DenseNet]:
        return {"trunk": self.trunk, "value": self.value, "advantage": self.advantage}

    def head_spec(self) -> DuelingHeadSpec:
        return DuelingHeadSpec(self.value.layer_sizes, self.advantage.layer_sizes)

    def num_params(self) -> int:
        return count_params(self.trunk.layer_sizes, self.head_spec())

    def set_training(self, training: bool) -> None:
        for net in self.networks().values():
            net.training = training

    def clone(self) -> "RainbowNet":
        other = object.__new__(RainbowNet)
        other.atoms = self.atoms
        other.trunk, other.value, other.advantage = self.trunk.clone(), self.value.clone(), self.advantage.clone()
        return other

    def sync_from(self, online: "RainbowNet") -> None:
        for name, net in self.networks().items():
            hard_update(net, online.networks()[name])


def dueling_q_logits(net: RainbowNet, states: np.ndarray) -> tuple[np.ndarray, tuple]:
    """
    logits(a, i) = value(i) + advantage(a, i) - media_a advantage(a, i).
    
    Returns:
        tuple: (logits (B, 8, N) o (8, N), caché para dueling_backward)
    """
    states = np.asarray(states, dtype=np.float64)
    squeeze = states.ndim == 1
    x = states[None, :] if squeeze else states
    features, trunk_tape = net.trunk.forward(x)
    value, value_tape = net.value.forward(features)
    adv, adv_tape = net.advantage.forward(features)
    adv = adv.reshape(len(x), N_ACTIONS, net.atoms)
    logits = value[:, None, :] + adv - adv.mean(axis=1, keepdims=True)
    cache = (trunk_tape, value_tape, adv_tape)
    return (logits[0] if squeeze else logits), cache


def dueling_backward(net: RainbowNet, cache: tuple, d_logits: np.ndarray) -> dict[str, list[np.ndarray]]:
    """Gradientes de los tres subredes a partir de dL/dlogits (B, 8, N)"""
    trunk_tape, value_tape, adv_tape = cache
    d_value = d_logits.sum(axis=1)
    d_adv = d_logits - d_logits.mean(axis=1, keepdims=True)
    value_bw = backward(net.value, value_tape, d_value)
    adv_bw = backward(net.advantage, adv_tape, d_adv.reshape(len(d_logits), -1))
    trunk_bw = backward(net.trunk, trunk_tape, value_bw.inputs + adv_bw.inputs)
    return {"trunk": trunk_bw.params, "value": value_bw.params, "advantage": adv_bw.params}


def q_values(logits: np.ndarray, support: Support) -> np.ndarray:
    """Q(a) = sum_i softmax(logits(a, ·))_i z_i"""
    return (softmax(logits) * support.z).sum(axis=-1)

# =============================================================================
# ACTUALIZACIÓN
# =============================================================================

class RainbowUpdate(NamedTuple):
    loss: float
    cross_entropy: np.ndarray
    priorities: np.ndarray
    grads: dict
    chosen_entropy: float


def rainbow_update(
    batch: Batch,
    weights: np.ndarray,
    net: RainbowNet,
    target_net: RainbowNet,
    support: Support,
    prior_eps: float,
) -> RainbowUpdate:
    """
    Pérdida de entropía cruzada ponderada por importancia entre la distribución
    objetivo proyectada y la distribución en línea, con selección doble de acción.
    
    Raises:
        TrainingDivergedError: Pérdida no finita
    """
    n = len(batch.actions)
    rows = np.arange(n)
    next_logits_online, _ = dueling_q_logits(net, batch.next_obs)
    next_actions = np.argmax(q_values(next_logits_online, support), axis=1)
    next_logits_target, _ = dueling_q_logits(target_net, batch.next_obs)
    next_dist = softmax(next_logits_target[rows, next_actions])
    target = categorical_project(next_dist, batch.rewards, batch.discounts, batch.dones, support)

    logits, cache = dueling_q_logits(net, batch.obs)
    log_p = log_softmax(logits[rows, batch.actions])
    cross_entropy = -(target * log_p).sum(axis=1)
    loss = float(np.mean(weights * cross_entropy))
    if not np.isfinite(loss):
        raise TrainingDivergedError("Pérdida Rainbow no finita", {"loss": loss})

    d_logits = np.zeros_like(logits)
    d_logits[rows, batch.actions] = weights[:, None] * (np.exp(log_p) - target) / n
    grads = dueling_backward(net, cache, d_logits)
    priorities = np.abs(cross_entropy) + prior_eps
    chosen_entropy = float(entropy(np.exp(log_p)).mean())
    return RainbowUpdate(loss, cross_entropy, priorities, grads, chosen_entropy)

# =============================================================================
# AGENTE
# =============================================================================

class RainbowAgent(BaseAgent):
    """Rainbow DQN con NoisyNet en los flujos y suelo epsilon-voraz"""
    kind = AgentKind.RAINBOW

    def __init__(self, config: RainbowConfig, seed: int = 0, reward_range: tuple[float, float] = (-0.6, 1.0)):
        super().__init__(config, seed)
        self.support = Support.from_config(config, reward_range)
        self.net = RainbowNet(config, seed)
        self.target_net = self.net.clone()
        self.target_net.set_training(False)
        self.opts = {name: AdamState.for_params(net.parameters(), config.lr) for name, net in self.net.networks().items()}
        self.buffer = PrioritizedBuffer(config.replay_capacity, config.alpha_per, config.prior_eps)
        self.nstep = NStepAccumulator(config.n_step, config.gamma)
        self._episode_stats: list[tuple[float, float, float]] = []

    def networks(self) -> dict[str, DenseNet]:
        nets = dict(self.net.networks())
        nets.update({f"target_{k}": v for k, v in self.target_net.networks().items()})
        return nets

    def optimizers(self) -> dict[str, AdamState]:
        return self.opts

    def parameter_counts(self) -> dict[str, int]:
        count = self.net.num_params()
        return {"optimized": count, "table": count}

    @property
    def beta(self) -> float:
        cfg: RainbowConfig = self.config
        frac = min(1.0, self.updates / cfg.beta_anneal_steps)
        return cfg.beta_per + (1.0 - cfg.beta_per) * frac

    def select_action(self, obs: np.ndarray) -> int:
        explore = self.rng.random() < self.config.epsilon_floor
        random_action = int(self.rng.integers(N_ACTIONS))
        if explore:
            return random_action
        self.net.set_training(True)
        logits, _ = dueling_q_logits(self.net, obs)
        return int(np.argmax(q_values(logits, self.support)))

    def greedy_action(self, obs: np.ndarray) -> int:
        self.net.set_training(False)
        logits, _ = dueling_q_logits(self.net, obs)
        self.net.set_training(True)
        return int(np.argmax(q_values(logits, self.support)))

    def observe(self, obs, action, reward, next_obs, done) -> None:
        super().observe(obs, action, reward, next_obs, done)
        for record in self.nstep.push(StepRecord(np.asarray(obs), int(action), float(reward), np.asarray(next_obs), bool(done))):
            self.buffer.add(record)
        cfg: RainbowConfig = self.config
        if self.total_steps < cfg.warmup_steps or len(self.buffer) < cfg.batch_size:
            return
        self._episode_stats.append(self.update())

    def update(self) -> tuple[float, float, float]:
        cfg: RainbowConfig = self.config
        self.net.set_training(True)
        batch, indices, weights = per_sample(self.buffer, cfg.batch_size, self.beta, self.rng, cfg.gamma)
        result = rainbow_update(batch, weights, self.net, self.target_net, self.support, cfg.prior_eps)
        for name, net in self.net.networks().items():
            apply_gradients(net, result.grads[name], self.opts[name])
        self.buffer.update_priorities(indices, result.priorities)
        self.updates += 1
        if self.updates % cfg.sync_period == 0:
            self.target_net.sync_from(self.net)
        return result.loss, float(result.priorities.mean()), result.chosen_entropy

    def end_episode(self) -> None:
        if not self._episode_stats:
            return
        stats = np.array(self._episode_stats)
        self.log_update(
            loss=float(stats[:, 0].mean()), mean_priority=float(stats[:, 1].mean()),
            chosen_entropy=float(stats[:, 2].mean()), beta=self.beta,
        )
        self._episode_stats = []

    def extra_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        support = {"atoms": self.support.atoms, "v_min": self.support.v_min, "v_max": self.support.v_max}
        return {"buffer": self.buffer.meta(), "support": support}, {f"buffer.{k}": v for k, v in self.buffer.arrays().items()}

    def load_extra_state(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        self.support = Support(**meta["support"])
        self.buffer.restore(meta["buffer"], {k[len("buffer."):]: v for k, v in arrays.items() if k.startswith("buffer.")})
