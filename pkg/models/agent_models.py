import enum
import itertools
from typing import ClassVar

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

# =============================================================================
# TIPOS DE AGENTE
# =============================================================================

class AgentKind(str, enum.Enum):
    """Agentes de deep RL del benchmark"""
    PPO = "ppo"
    TRPO = "trpo"
    SAC = "sac"
    RAINBOW = "rainbow"


class AgentConfig(BaseModel):
    """Base común: rejillas de búsqueda declaradas en GRID"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    GRID: ClassVar[dict[str, tuple]] = {}

    gamma: float = Field(0.99, gt=0, lt=1)

    @classmethod
    def grid_cells(cls) -> list[dict]:
        """Producto cartesiano de las filas de la rejilla, en orden determinista"""
        keys = list(cls.GRID)
        return [dict(zip(keys, values)) for values in itertools.product(*(cls.GRID[k] for k in keys))]


class PpoConfig(AgentConfig):
    """PPO: valores por defecto = entradas en negrita de la rejilla"""
    GRID: ClassVar[dict[str, tuple]] = {
        "lr_actor": (1e-5, 1e-2),
        "lr_critic": (1e-3, 1e-2),
        "clip_eps": (0.2, 0.3),
    }

    lr_actor: float = Field(1e-5, gt=0)
    lr_critic: float = Field(1e-3, gt=0)
    clip_eps: float = Field(0.2, gt=0, lt=1)
    gae_lambda: float = Field(0.95, gt=0, le=1)
    epochs: PositiveInt = 10
    minibatch: PositiveInt = 256
    entropy_coef: float = Field(0.01, ge=0)
    normalize_advantages: bool = True
    hidden_sizes: tuple[int, ...] = (64, 64)


class TrpoConfig(AgentConfig):
    """TRPO: 'Depth of neural nets' se interpreta como ancho de la capa oculta"""
    GRID: ClassVar[dict[str, tuple]] = {
        "max_kl": (0.005, 0.01),
        "hidden_width": (32, 64),
        "line_search_iters": (10, 20),
    }

    max_kl: float = Field(0.005, gt=0)
    hidden_width: PositiveInt = 64
    line_search_iters: PositiveInt = 20
    cg_iters: PositiveInt = 10
    cg_damping: float = Field(0.1, ge=0)
    gae_lambda: float = Field(0.95, gt=0, le=1)
    lr_critic: float = Field(1e-3, gt=0)
    critic_epochs: PositiveInt = 5
    critic_minibatch: PositiveInt = 256
    normalize_advantages: bool = True


class SacConfig(AgentConfig):
    """SAC discreto con temperatura fija"""
    GRID: ClassVar[dict[str, tuple]] = {
        "tau": (0.005, 1e-2),
        "lr": (3e-4, 5e-4),
        "batch_size": (64, 128, 256),
    }

    tau: float = Field(0.005, gt=0, le=1)
    lr: float = Field(5e-4, gt=0)
    batch_size: PositiveInt = 64
    alpha: float = Field(0.2, ge=0, description="Temperatura de entropía (fija)")
    replay_capacity: PositiveInt = 100_000
    warmup_steps: int = Field(1000, ge=0)
    updates_per_step: PositiveInt = 1
    hidden_sizes: tuple[int, ...] = (256, 256)


class RainbowConfig(AgentConfig):
    """
    Rainbow DQN. Las filas 'α (learning rate)' y 'β (Weight Decay)' de la
    rejilla se leen como exponentes de PER (alpha_per, beta_per).
    """
    GRID: ClassVar[dict[str, tuple]] = {
        "atoms": (25, 100),
        "alpha_per": (0.1, 0.3),
        "beta_per": (0.5, 0.7),
        "prior_eps": (1e-5, 1e-4),
    }

    atoms: int = Field(25, ge=2)
    alpha_per: float = Field(0.3, ge=0)
    beta_per: float = Field(0.7, ge=0, le=1)
    beta_anneal_steps: PositiveInt = 400_000
    prior_eps: float = Field(1e-4, gt=0)
    v_min: float = -1.0
    v_max: float = 1.0
    derive_support: bool = Field(False, description="Usa [r_min/(1-gamma), r_max/(1-gamma)] de las cotas de recompensa en lugar de v_min/v_max")
    n_step: PositiveInt = 3
    lr: float = Field(1e-4, gt=0)
    batch_size: PositiveInt = 64
    replay_capacity: PositiveInt = 100_000
    warmup_steps: int = Field(1000, ge=0)
    sync_period: PositiveInt = 500
    noisy: bool = True
    noisy_sigma0: float = Field(0.5, gt=0)
    epsilon_floor: float = Field(0.01, ge=0, le=1)
    trunk_width: PositiveInt = 128
    stream_width: PositiveInt = 128

    @model_validator(mode="after")
    def _check_support(self):
        if self.v_min >= self.v_max:
            raise ValueError("v_min debe ser menor que v_max")
        return self


AGENT_CONFIGS: dict[AgentKind, type[AgentConfig]] = {
    AgentKind.PPO: PpoConfig,
    AgentKind.TRPO: TrpoConfig,
    AgentKind.SAC: SacConfig,
    AgentKind.RAINBOW: RainbowConfig,
}
