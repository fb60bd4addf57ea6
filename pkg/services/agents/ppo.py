"""
Agente PPO: objetivo sustituto recortado, crítico por MSE y bonus de entropía.
"""

import logging
from typing import NamedTuple

import numpy as np

from models.agent_models import AgentKind, PpoConfig
from models.env_models import N_ACTIONS, OBS_DIM
from services.agents.base import BaseAgent, net_seed
from services.agents.rollout import RolloutBatch, RolloutCollector, sample_categorical, value_loss
from services.nn import AdamState, DenseNet, apply_gradients, backward, entropy, kl_categorical, log_softmax, softmax
from services.nn.functional import entropy_logit_grad
from utils.errors import TrainingDivergedError

logger = logging.getLogger(__name__)


def clipped_surrogate(ratio: np.ndarray, advantages: np.ndarray, clip_eps: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Objetivo por muestra min(r·A, clip(r, 1-eps, 1+eps)·A) y su derivada respecto a r.
    
    El gradiente fluye solo por la rama sin recortar cuando el mínimo la elige;
    en la región recortada es exactamente cero.
    """
    ratio = np.asarray(ratio, dtype=np.float64)
    advantages = np.asarray(advantages, dtype=np.float64)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    objective = np.minimum(unclipped, clipped)
    d_ratio = np.where(unclipped <= clipped, advantages, 0.0)
    return objective, d_ratio


class PpoLoss(NamedTuple):
    loss: float
    actor_grads: list
    critic_grads: list
    surrogate: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float


def ppo_loss(
    batch: RolloutBatch,
    policy: DenseNet,
    critic: DenseNet,
    clip_eps: float,
    entropy_coef: float = 0.01,
) -> PpoLoss:
    """
    Pérdida total = -sustituto recortado + MSE del crítico - coef·entropía.
    
    Returns:
        PpoLoss: Valor escalar, gradientes de actor y crítico y diagnósticos
    """
    n = len(batch)
    logits, tape = policy.forward(batch.observations)
    log_probs = log_softmax(logits)
    probs = np.exp(log_probs)
    rows = np.arange(n)
    ratio = np.exp(log_probs[rows, batch.actions] - batch.log_probs_old)
    objective, d_ratio = clipped_surrogate(ratio, batch.advantages, clip_eps)
    surrogate = float(objective.mean())
    ent = float(entropy(probs).mean())

    one_hot = np.zeros_like(probs)
    one_hot[rows, batch.actions] = 1.0
    d_logits = -(d_ratio * ratio)[:, None] * (one_hot - probs) / n
    d_logits -= entropy_coef * entropy_logit_grad(probs, log_probs) / n
    actor_grads = backward(policy, tape, d_logits).params

    v_loss, critic_grads = value_loss(critic, batch.observations, batch.returns)
    loss = -surrogate + v_loss - entropy_coef * ent
    clip_fraction = float(np.mean(np.abs(ratio - 1.0) > clip_eps))
    approx_kl = float(np.mean(batch.log_probs_old - log_probs[rows, batch.actions]))
    return PpoLoss(loss, actor_grads, critic_grads, surrogate, v_loss, ent, approx_kl, clip_fraction)


class PpoAgent(BaseAgent):
    """PPO con un episodio completo por rollout"""
    kind = AgentKind.PPO

    def __init__(self, config: PpoConfig, seed: int = 0):
        super().__init__(config, seed)
        hidden = list(config.hidden_sizes)
        self.actor = DenseNet([OBS_DIM, *hidden, N_ACTIONS], seed=net_seed(seed, 0))
        self.critic = DenseNet([OBS_DIM, *hidden, 1], seed=net_seed(seed, 1))
        self.actor_opt = AdamState.for_params(self.actor.parameters(), config.lr_actor)
        self.critic_opt = AdamState.for_params(self.critic.parameters(), config.lr_critic)
        self.rollout = RolloutCollector()

    def networks(self) -> dict[str, DenseNet]:
        return {"actor": self.actor, "critic": self.critic}

    def optimizers(self) -> dict[str, AdamState]:
        return {"actor": self.actor_opt, "critic": self.critic_opt}

    def select_action(self, obs: np.ndarray) -> int:
        return sample_categorical(self.actor(obs), self.rng)

    def greedy_action(self, obs: np.ndarray) -> int:
        return int(np.argmax(self.actor(obs)))

    def policy_probs(self, obs: np.ndarray) -> np.ndarray:
        return softmax(self.actor(obs))

    def observe(self, obs, action, reward, next_obs, done) -> None:
        super().observe(obs, action, reward, next_obs, done)
        self.rollout.add(obs, action, reward, done)

    def end_episode(self) -> None:
        if not len(self.rollout):
            return
        cfg: PpoConfig = self.config
        batch = self.rollout.build(self.actor, self.critic, cfg.gamma, cfg.gae_lambda)
        episode_return = float(batch.rewards.sum())
        if cfg.normalize_advantages:
            batch = batch.normalized()
        probs_before = softmax(self.actor(batch.observations))

        last = None
        for _ in range(cfg.epochs):
            order = self.rng.permutation(len(batch))
            for start in range(0, len(batch), cfg.minibatch):
                mb = batch.subset(order[start:start + cfg.minibatch])
                last = ppo_loss(mb, self.actor, self.critic, cfg.clip_eps, cfg.entropy_coef)
                if not np.isfinite(last.loss):
                    raise TrainingDivergedError("Pérdida PPO no finita", {"update": self.updates, "loss": last.loss})
                apply_gradients(self.actor, last.actor_grads, self.actor_opt)
                apply_gradients(self.critic, last.critic_grads, self.critic_opt)

        kl = float(kl_categorical(probs_before, softmax(self.actor(batch.observations))).mean())
        self.updates += 1
        self.log_update(
            surrogate=last.surrogate, kl=kl, entropy=last.entropy,
            value_loss=last.value_loss, clip_fraction=last.clip_fraction, mean_return=episode_return,
        )
        self.rollout.clear()
