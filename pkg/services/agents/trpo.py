"""
Agente TRPO: gradiente natural por gradiente conjugado con productos
Fisher-vector exactos y búsqueda lineal con restricción de KL.
"""

import logging
import math
from typing import Callable

import numpy as np

from models.agent_models import AgentKind, TrpoConfig
from models.env_models import N_ACTIONS, OBS_DIM
from services.agents.base import BaseAgent, net_seed
from services.agents.rollout import RolloutBatch, RolloutCollector, sample_categorical, value_loss
from services.nn import (
    AdamState, DenseNet, apply_gradients, backward, entropy, flatten, get_flat, jvp,
    kl_categorical, log_softmax, set_flat, softmax, unflatten,
)

logger = logging.getLogger(__name__)


def conjugate_gradient(
    matvec: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    iters: int = 10,
    residual_tol: float = 1e-10,
) -> tuple[np.ndarray, float]:
    """
    Resuelve A x = b para A simétrica definida positiva dada como producto matriz-vector.
    
    Returns:
        tuple: (x, norma del residuo final; NaN/Inf si la iteración diverge)
    """
    x = np.zeros_like(b)
    r = b.copy()
    p = b.copy()
    rs_old = float(r @ r)
    for _ in range(iters):
        if rs_old <= residual_tol ** 2:
            break
        Ap = matvec(p)
        pAp = float(p @ Ap)
        if not np.isfinite(pAp) or pAp <= 0.0:
            return x, float("nan")
        alpha = rs_old / pAp
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs_old) * p
        rs_old = rs_new
    return x, math.sqrt(rs_old)


def _surrogate(policy: DenseNet, batch: RolloutBatch) -> tuple[float, np.ndarray]:
    probs = softmax(policy(batch.observations))
    log_probs = np.log(probs[np.arange(len(batch)), batch.actions])
    return float(np.mean(np.exp(log_probs - batch.log_probs_old) * batch.advantages)), probs


def trpo_update(batch: RolloutBatch, policy: DenseNet, cfg: TrpoConfig) -> dict:
    """
    Paso TRPO sobre la política.
    
    Resuelve F x = g por gradiente conjugado (F = Hessiano de la KL con
    amortiguación), escala a sqrt(2·delta / xᵀFx)·x y reduce a la mitad hasta
    que el sustituto mejora y la KL empírica cumple <= delta. Si ninguna
    fracción cumple, la política queda intacta.
    
    Returns:
        dict: accepted, kl, surrogate_delta, backtracks, cg_residual, grad_norm
    """
    n = len(batch)
    rows = np.arange(n)
    logits, tape = policy.forward(batch.observations)
    p_old = softmax(logits)
    one_hot = np.zeros_like(p_old)
    one_hot[rows, batch.actions] = 1.0
    # batch.log_probs_old corresponde a la política vigente
    batch = RolloutBatch(**{**batch.__dict__, "log_probs_old": log_softmax(logits)[rows, batch.actions]})

    g = flatten(backward(policy, tape, batch.advantages[:, None] * (one_hot - p_old) / n).params)
    diagnostics = {"accepted": False, "kl": 0.0, "surrogate_delta": 0.0, "backtracks": 0, "cg_residual": 0.0,
                   "grad_norm": float(np.linalg.norm(g))}
    if not np.all(np.isfinite(g)) or diagnostics["grad_norm"] == 0.0:
        return diagnostics

    like = policy.parameters()

    def fisher_vector(v: np.ndarray, damping: float = cfg.cg_damping) -> np.ndarray:
        jv = jvp(policy, tape, unflatten(v, like))
        fz = p_old * jv - p_old * (p_old * jv).sum(axis=1, keepdims=True)
        return flatten(backward(policy, tape, fz / n).params) + damping * v

    x, residual = conjugate_gradient(fisher_vector, g, cfg.cg_iters)
    diagnostics["cg_residual"] = residual
    if not np.isfinite(residual):
        logger.warning("TRPO: residuo de gradiente conjugado no finito; actualización abortada")
        return diagnostics
    shs = float(x @ fisher_vector(x))
    if not np.isfinite(shs) or shs <= 0.0:
        logger.warning("TRPO: curvatura no positiva; actualización abortada")
        return diagnostics
    full_step = math.sqrt(2.0 * cfg.max_kl / shs) * x

    theta_old = get_flat(policy)
    surrogate_old = float(np.mean(batch.advantages))
    for k in range(cfg.line_search_iters):
        set_flat(policy, theta_old + 0.5 ** k * full_step)
        surrogate_new, p_new = _surrogate(policy, batch)
        kl = float(kl_categorical(p_old, p_new).mean())
        improvement = surrogate_new - surrogate_old
        if np.isfinite(kl) and kl <= cfg.max_kl and improvement > 0.0:
            diagnostics.update(accepted=True, kl=kl, surrogate_delta=improvement, backtracks=k)
            return diagnostics
    set_flat(policy, theta_old)
    diagnostics["backtracks"] = cfg.line_search_iters
    return diagnostics


class TrpoAgent(BaseAgent):
    """TRPO con actor [4, h, 8] y crítico [4, h, 1]"""
    kind = AgentKind.TRPO

    def __init__(self, config: TrpoConfig, seed: int = 0):
        super().__init__(config, seed)
        width = config.hidden_width
        self.actor = DenseNet([OBS_DIM, width, N_ACTIONS], seed=net_seed(seed, 0))
        self.critic = DenseNet([OBS_DIM, width, 1], seed=net_seed(seed, 1))
        self.critic_opt = AdamState.for_params(self.critic.parameters(), config.lr_critic)
        self.rollout = RolloutCollector()

    def networks(self) -> dict[str, DenseNet]:
        return {"actor": self.actor, "critic": self.critic}

    def optimizers(self) -> dict[str, AdamState]:
        return {"critic": self.critic_opt}

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
        cfg: TrpoConfig = self.config
        batch = self.rollout.build(self.actor, self.critic, cfg.gamma, cfg.gae_lambda)
        episode_return = float(batch.rewards.sum())
        policy_batch = batch.normalized() if cfg.normalize_advantages else batch
        diagnostics = trpo_update(policy_batch, self.actor, cfg)

        critic_loss = 0.0
        for _ in range(cfg.critic_epochs):
            order = self.rng.permutation(len(batch))
            for start in range(0, len(batch), cfg.critic_minibatch):
                idx = order[start:start + cfg.critic_minibatch]
                critic_loss, grads = value_loss(self.critic, batch.observations[idx], batch.returns[idx])
                apply_gradients(self.critic, grads, self.critic_opt)

        self.updates += 1
        probs = softmax(self.actor(batch.observations))
        self.log_update(
            surrogate=diagnostics["surrogate_delta"], kl=diagnostics["kl"], accepted=diagnostics["accepted"],
            backtracks=diagnostics["backtracks"], entropy=float(entropy(probs).mean()),
            value_loss=float(critic_loss), mean_return=episode_return,
        )
        self.rollout.clear()
