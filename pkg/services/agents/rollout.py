"""
Recolección on-policy compartida por PPO y TRPO: un episodio completo por
actualización, ventajas GAE y normalización.
"""

from dataclasses import dataclass, replace

import numpy as np

from services.nn import DenseNet, backward, log_softmax, softmax


@dataclass
class RolloutBatch:
    """Datos por paso alineados de un rollout"""
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray
    values: np.ndarray
    log_probs_old: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def __len__(self) -> int:
        return len(self.actions)

    def subset(self, indices: np.ndarray) -> "RolloutBatch":
        return RolloutBatch(**{k: v[indices] for k, v in self.__dict__.items()})

    def normalized(self) -> "RolloutBatch":
        """Ventajas con media 0 y desviación 1 (sin escalar si la desviación es nula)"""
        adv = self.advantages - self.advantages.mean()
        std = adv.std()
        if std > 1e-12:
            adv = adv / std
        return replace(self, advantages=adv)


def compute_advantages(
    rewards: np.ndarray,
    values: np.ndarray,
    gamma: float,
    lam: float,
    dones: np.ndarray | None = None,
    last_value: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Estimación generalizada de ventajas (GAE).
    
    Args:
        rewards: r_t del episodio
        values: V(s_t) del crítico
        gamma: Descuento en (0, 1) (se admite 0 para el caso de un paso)
        lam: Lambda en (0, 1]; lam = 1 da retorno descontado menos la línea base
        dones: Banderas de terminal (enmascaran el bootstrap)
        last_value: V del estado tras el último paso si no es terminal
    
    Returns:
        tuple: (ventajas, retornos = ventajas + valores)
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.zeros_like(rewards) if dones is None else np.asarray(dones, dtype=np.float64)
    advantages = np.zeros_like(rewards)
    gae = 0.0
    for t in reversed(range(len(rewards))):
        next_value = last_value if t == len(rewards) - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        gae = delta + gamma * lam * nonterminal * gae
        advantages[t] = gae
    return advantages, advantages + values


class RolloutCollector:
    """Acumula (s, a, r, done) del episodio en curso"""

    def __init__(self):
        self.clear()

    def clear(self) -> None:
        self.obs: list[np.ndarray] = []
        self.actions: list[int] = []
        self.rewards: list[float] = []
        self.dones: list[bool] = []

    def __len__(self) -> int:
        return len(self.actions)

    def add(self, obs: np.ndarray, action: int, reward: float, done: bool) -> None:
        self.obs.append(np.asarray(obs, dtype=np.float64))
        self.actions.append(int(action))
        self.rewards.append(float(reward))
        self.dones.append(bool(done))

    def build(self, actor: DenseNet, critic: DenseNet, gamma: float, lam: float) -> RolloutBatch:
        """Valores y log-probabilidades con las redes vigentes, luego GAE"""
        obs = np.stack(self.obs)
        actions = np.array(self.actions, dtype=np.int64)
        rewards = np.array(self.rewards)
        dones = np.array(self.dones, dtype=np.float64)
        values = critic(obs)[:, 0]
        log_probs = log_softmax(actor(obs))[np.arange(len(actions)), actions]
        advantages, returns = compute_advantages(rewards, values, gamma, lam, dones)
        return RolloutBatch(obs, actions, rewards, dones, values, log_probs, advantages, returns)


def sample_categorical(logits: np.ndarray, rng: np.random.Generator) -> int:
    """Muestra una acción de softmax(logits)"""
    probs = softmax(logits)
    return int(rng.choice(len(probs), p=probs))


def value_loss(critic: DenseNet, obs: np.ndarray, returns: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """MSE del crítico y sus gradientes"""
    values, tape = critic.forward(obs)
    err = values[:, 0] - returns
    loss = float(np.mean(err ** 2))
    grad_out = (2.0 * err / len(err))[:, None]
    return loss, backward(critic, tape, grad_out).params
