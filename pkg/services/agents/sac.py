"""
Agente SAC discreto: Q gemelas, objetivo de política regularizado por
entropía con esperanza exacta sobre las 8 acciones, actualización suave de
las redes objetivo y memoria de repetición uniforme.
"""

from dataclasses import dataclass
import logging

import numpy as np

from models.agent_models import AgentKind, SacConfig
from models.env_models import N_ACTIONS, OBS_DIM
from services.agents.base import BaseAgent, net_seed
from services.agents.replay import Batch, ReplayBuffer, StepRecord
from services.agents.rollout import sample_categorical
from services.nn import AdamState, DenseNet, apply_gradients, backward, entropy, log_softmax, soft_update
from utils.errors import TrainingDivergedError

logger = logging.getLogger(__name__)


@dataclass
class SacNets:
    actor: DenseNet
    q1: DenseNet
    q2: DenseNet
    q1_target: DenseNet
    q2_target: DenseNet

    @classmethod
    def build(cls, hidden: list[int], seed: int) -> "SacNets":
        sizes = [OBS_DIM, *hidden, N_ACTIONS]
        q1 = DenseNet(sizes, seed=net_seed(seed, 1))
        q2 = DenseNet(sizes, seed=net_seed(seed, 2))
        return cls(DenseNet(sizes, seed=net_seed(seed, 0)), q1, q2, q1.clone(), q2.clone())

# =============================================================================
# PÉRDIDAS
# =============================================================================

def soft_value_target(
    next_probs: np.ndarray,
    next_log_probs: np.ndarray,
    q1_next: np.ndarray,
    q2_next: np.ndarray,
    rewards: np.ndarray,
    dones: np.ndarray,
    alpha: float,
    gamma: float,
) -> np.ndarray:
    """y = r + gamma (1 - d) sum_a pi(a|s') (min(Q1', Q2')(s', a) - alpha log pi(a|s'))"""
    soft_v = (next_probs * (np.minimum(q1_next, q2_next) - alpha * next_log_probs)).sum(axis=-1)
    return rewards + gamma * (1.0 - dones) * soft_v


def sac_value_target(batch: Batch, nets: SacNets, alpha: float, gamma: float) -> np.ndarray:
    """Objetivo de los críticos calculado con el actor y las Q objetivo"""
    next_log_probs = log_softmax(nets.actor(batch.next_obs))
    return soft_value_target(
        np.exp(next_log_probs), next_log_probs,
        nets.q1_target(batch.next_obs), nets.q2_target(batch.next_obs),
        batch.rewards, batch.dones, alpha, gamma,
    )


def policy_loss_terms(logits: np.ndarray, q_min: np.ndarray, alpha: float) -> tuple[float, np.ndarray]:
    """
    L = media_s sum_a pi(a|s) (alpha log pi(a|s) - minQ(s, a)) y dL/dlogits.
    
    Con f_a = alpha log pi_a - q_a: dL/dz_j = pi_j (f_j - E_pi[f]) / B.
    """
    log_probs = log_softmax(logits)
    probs = np.exp(log_probs)
    f = alpha * log_probs - q_min
    per_state = (probs * f).sum(axis=-1)
    d_logits = probs * (f - per_state[..., None])
    if d_logits.ndim == 2:
        d_logits = d_logits / len(d_logits)
    return float(np.mean(per_state)), d_logits


def sac_policy_loss(obs: np.ndarray, nets: SacNets, alpha: float) -> tuple[float, list[np.ndarray]]:
    """Pérdida del actor y sus gradientes (críticos tratados como constantes)"""
    q_min = np.minimum(nets.q1(obs), nets.q2(obs))
    logits, tape = nets.actor.forward(obs)
    loss, d_logits = policy_loss_terms(logits, q_min, alpha)
    return loss, backward(nets.actor, tape, d_logits).params


def critic_loss(critic: DenseNet, batch: Batch, targets: np.ndarray) -> tuple[float, list[np.ndarray], np.ndarray]:
    """MSE de Q(s, a) frente al objetivo; devuelve también Q(s, a)"""
    q, tape = critic.forward(batch.obs)
    rows = np.arange(len(targets))
    q_taken = q[rows, batch.actions]
    err = q_taken - targets
    grad = np.zeros_like(q)
    grad[rows, batch.actions] = 2.0 * err / len(err)
    return float(np.mean(err ** 2)), backward(critic, tape, grad).params, q_taken

# =============================================================================
# AGENTE
# =============================================================================

class SacAgent(BaseAgent):
    """SAC discreto con temperatura fija"""
    kind = AgentKind.SAC

    def __init__(self, config: SacConfig, seed: int = 0):
        super().__init__(config, seed)
        self.nets = SacNets.build(list(config.hidden_sizes), seed)
        self.actor_opt = AdamState.for_params(self.nets.actor.parameters(), config.lr)
        self.q1_opt = AdamState.for_params(self.nets.q1.parameters(), config.lr)
        self.q2_opt = AdamState.for_params(self.nets.q2.parameters(), config.lr)
        self.buffer = ReplayBuffer(config.replay_capacity)
        self._episode_stats: list[tuple[float, float, float, float]] = []

    def networks(self) -> dict[str, DenseNet]:
        n = self.nets
        return {"actor": n.actor, "q1": n.q1, "q2": n.q2, "target_q1": n.q1_target, "target_q2": n.q2_target}

    def optimizers(self) -> dict[str, AdamState]:
        return {"actor": self.actor_opt, "q1": self.q1_opt, "q2": self.q2_opt}

    def parameter_counts(self) -> dict[str, int]:
        per_net = self.nets.actor.num_params()
        optimized = per_net + self.nets.q1.num_params() + self.nets.q2.num_params()
        return {"optimized": optimized, "table": optimized + per_net}

    def select_action(self, obs: np.ndarray) -> int:
        if self.total_steps < self.config.warmup_steps:
            return int(self.rng.integers(N_ACTIONS))
        return sample_categorical(self.nets.actor(obs), self.rng)

    def greedy_action(self, obs: np.ndarray) -> int:
        return int(np.argmax(self.nets.actor(obs)))

    def policy_probs(self, obs: np.ndarray) -> np.ndarray:
        return np.exp(log_softmax(self.nets.actor(obs)))

    def observe(self, obs, action, reward, next_obs, done) -> None:
        super().observe(obs, action, reward, next_obs, done)
        self.buffer.add(StepRecord(np.asarray(obs), int(action), float(reward), np.asarray(next_obs), bool(done)))
        cfg: SacConfig = self.config
        if self.total_steps < cfg.warmup_steps or len(self.buffer) < cfg.batch_size:
            return
        for _ in range(cfg.updates_per_step):
            self._episode_stats.append(self.update())

    def update(self) -> tuple[float, float, float, float]:
        """Una actualización de críticos, actor y objetivos"""
        cfg: SacConfig = self.config
        batch = self.buffer.sample(cfg.batch_size, self.rng)
        targets = sac_value_target(batch, self.nets, cfg.alpha, cfg.gamma)
        loss1, grads1, q1_taken = critic_loss(self.nets.q1, batch, targets)
        loss2, grads2, q2_taken = critic_loss(self.nets.q2, batch, targets)
        policy_loss, actor_grads = sac_policy_loss(batch.obs, self.nets, cfg.alpha)
        if not np.isfinite(loss1 + loss2 + policy_loss):
            raise TrainingDivergedError("Pérdida SAC no finita", {"update": self.updates, "q1": loss1, "q2": loss2, "policy": policy_loss})
        apply_gradients(self.nets.q1, grads1, self.q1_opt)
        apply_gradients(self.nets.q2, grads2, self.q2_opt)
        apply_gradients(self.nets.actor, actor_grads, self.actor_opt)
        soft_update(self.nets.q1_target, self.nets.q1, cfg.tau)
        soft_update(self.nets.q2_target, self.nets.q2, cfg.tau)
        self.updates += 1
        ent = float(entropy(np.exp(log_softmax(self.nets.actor(batch.obs)))).mean())
        return 0.5 * (loss1 + loss2), policy_loss, ent, float(np.mean(np.abs(q1_taken - q2_taken)))

    def end_episode(self) -> None:
        if not self._episode_stats:
            return
        stats = np.array(self._episode_stats)
        self.log_update(
            critic_loss=float(stats[:, 0].mean()), policy_loss=float(stats[:, 1].mean()),
            entropy=float(stats[:, 2].mean()), twin_q_gap=float(stats[:, 3].mean()),
        )
        self._episode_stats = []

    def extra_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        return {"buffer": self.buffer.meta()}, {f"buffer.{k}": v for k, v in self.buffer.arrays().items()}

    def load_extra_state(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        self.buffer.restore(meta["buffer"], {k[len("buffer."):]: v for k, v in arrays.items() if k.startswith("buffer.")})
