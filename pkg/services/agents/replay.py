"""
Memorias de repetición: anillo uniforme (SAC), memoria priorizada con
árbol de sumas (Rainbow) y agregación de n pasos.
"""

from collections import deque
from typing import NamedTuple, Sequence

import numpy as np

from models.env_models import OBS_DIM
from utils.errors import ContractViolation


class Batch(NamedTuple):
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray
    discounts: np.ndarray  # gamma^k del bootstrap (1 para transiciones de un paso)


class StepRecord(NamedTuple):
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool
    steps: int = 1

# =============================================================================
# ANILLO UNIFORME
# =============================================================================

class ReplayBuffer:
    """Anillo de transiciones de capacidad fija; se desaloja la más antigua"""

    def __init__(self, capacity: int, obs_dim: int = OBS_DIM):
        if capacity < 1:
            raise ContractViolation("La capacidad debe ser >= 1")
        self.capacity = int(capacity)
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.dones = np.zeros(capacity)
        self.steps = np.ones(capacity, dtype=np.int64)
        self.ptr = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, record: StepRecord) -> int:
        """Inserta y devuelve el índice ocupado"""
        i = self.ptr
        self.obs[i] = record.obs
        self.actions[i] = record.action
        self.rewards[i] = record.reward
        self.next_obs[i] = record.next_obs
        self.dones[i] = float(record.done)
        self.steps[i] = record.steps
        self.ptr = (self.ptr + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        return i

    def gather(self, indices: np.ndarray, gamma: float = 1.0) -> Batch:
        return Batch(
            obs=self.obs[indices],
            actions=self.actions[indices],
            rewards=self.rewards[indices],
            next_obs=self.next_obs[indices],
            dones=self.dones[indices],
            discounts=gamma ** self.steps[indices],
        )

    def sample(self, batch_size: int, rng: np.random.Generator, gamma: float = 1.0) -> Batch:
        """
        Muestreo uniforme con reemplazo.
        
        Raises:
            ContractViolation: Menos elementos que batch_size
        """
        if self.size < batch_size:
            raise ContractViolation(f"Memoria con {self.size} elementos < lote {batch_size}")
        return self.gather(rng.integers(0, self.size, size=batch_size), gamma)

    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "obs": self.obs, "actions": self.actions, "rewards": self.rewards,
            "next_obs": self.next_obs, "dones": self.dones, "steps": self.steps,
        }

    def meta(self) -> dict:
        return {"ptr": self.ptr, "size": self.size}

    def restore(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        for key, value in self.arrays().items():
            value[...] = arrays[key]
        self.ptr, self.size = meta["ptr"], meta["size"]

# =============================================================================
# MEMORIA PRIORIZADA
# =============================================================================

class SumTree:
    """Árbol de sumas prefijas sobre las prioridades p_i^alpha"""

    def __init__(self, capacity: int):
        leaves = 1
        while leaves < capacity:
            leaves *= 2
        self.leaves = leaves
        self.tree = np.zeros(2 * leaves)

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def get(self, index: int) -> float:
        return float(self.tree[self.leaves + index])

    def set(self, index: int, value: float) -> None:
        i = self.leaves + index
        self.tree[i] = value
        i //= 2
        while i >= 1:
            self.tree[i] = self.tree[2 * i] + self.tree[2 * i + 1]
            i //= 2

    def find(self, mass: float) -> int:
        """Hoja cuyo intervalo de suma prefija contiene mass"""
        i = 1
        while i < self.leaves:
            left = 2 * i
            if mass < self.tree[left] or self.tree[left + 1] <= 0.0:
                i = left
            else:
                mass -= self.tree[left]
                i = left + 1
        return i - self.leaves

    def is_consistent(self, atol: float = 1e-9) -> bool:
        """Cada nodo interno es la suma de sus hijos"""
        internal = np.arange(1, self.leaves)
        return bool(np.allclose(self.tree[internal], self.tree[2 * internal] + self.tree[2 * internal + 1], atol=atol))


class PrioritizedBuffer(ReplayBuffer):
    """Memoria con muestreo proporcional a p_i^alpha_per"""

    def __init__(self, capacity: int, alpha_per: float, prior_eps: float, obs_dim: int = OBS_DIM):
        super().__init__(capacity, obs_dim)
        self.alpha_per = float(alpha_per)
        self.prior_eps = float(prior_eps)
        self.priorities = np.zeros(capacity)
        self.tree = SumTree(capacity)
        self.max_priority = 1.0

    def add(self, record: StepRecord) -> int:
        i = super().add(record)
        self._set_priority(i, self.max_priority)
        return i

    def _set_priority(self, index: int, priority: float) -> None:
        priority = max(float(priority), self.prior_eps)
        self.priorities[index] = priority
        self.tree.set(index, priority ** self.alpha_per)

    def update_priorities(self, indices: Sequence[int], priorities: Sequence[float]) -> None:
        for i, p in zip(indices, priorities):
            self._set_priority(int(i), float(p))
            self.max_priority = max(self.max_priority, float(p))

    def probabilities(self) -> np.ndarray:
        """P(i) de los elementos almacenados"""
        scaled = self.priorities[:self.size] ** self.alpha_per
        return scaled / scaled.sum()

    def arrays(self) -> dict[str, np.ndarray]:
        return {**super().arrays(), "priorities": self.priorities, "tree": self.tree.tree}

    def meta(self) -> dict:
        return {**super().meta(), "max_priority": self.max_priority}

    def restore(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        super().restore(meta, arrays)
        self.max_priority = meta["max_priority"]


def per_sample(
    buffer: PrioritizedBuffer,
    batch_size: int,
    beta_per: float,
    rng: np.random.Generator,
    gamma: float = 1.0,
) -> tuple[Batch, np.ndarray, np.ndarray]:
    """
    Muestreo priorizado por búsqueda en sumas prefijas.
    
    Returns:
        tuple: (lote, índices, pesos de importancia (n·P(i))^-beta / máximo)
    
    Raises:
        ContractViolation: Memoria vacía o con menos elementos que el lote
    """
    if buffer.size == 0:
        raise ContractViolation("per_sample sobre una memoria vacía")
    if buffer.size < batch_size:
        raise ContractViolation(f"Memoria con {buffer.size} elementos < lote {batch_size}")
    total = buffer.tree.total
    masses = rng.random(batch_size) * total
    indices = np.array([min(buffer.tree.find(m), buffer.size - 1) for m in masses], dtype=np.int64)
    probs = np.array([buffer.tree.get(i) for i in indices]) / total
    weights = (buffer.size * probs) ** (-beta_per)
    weights = weights / weights.max()
    return buffer.gather(indices, gamma), indices, weights

# =============================================================================
# N PASOS
# =============================================================================

def nstep_aggregate(window: Sequence[StepRecord], n: int, gamma: float) -> StepRecord:
    """
    Agrega hasta n transiciones consecutivas: recompensa sum gamma^k r_k,
    estado siguiente el de la última incluida, truncando en el primer terminal.
    """
    if not window:
        raise ContractViolation("Ventana vacía")
    reward = 0.0
    last = window[0]
    count = 0
    for k, record in enumerate(window[:n]):
        reward += gamma ** k * record.reward
        last = record
        count += 1
        if record.done:
            break
    first = window[0]
    return StepRecord(first.obs, first.action, reward, last.next_obs, bool(last.done), count)


class NStepAccumulator:
    """Ventana deslizante que emite transiciones de n pasos"""

    def __init__(self, n: int, gamma: float):
        self.n = int(n)
        self.gamma = float(gamma)
        self.window: deque[StepRecord] = deque()

    def push(self, record: StepRecord) -> list[StepRecord]:
        self.window.append(record)
        ready = []
        if record.done:
            while self.window:
                ready.append(nstep_aggregate(list(self.window), self.n, self.gamma))
                self.window.popleft()
        elif len(self.window) == self.n:
            ready.append(nstep_aggregate(list(self.window), self.n, self.gamma))
            self.window.popleft()
        return ready
