"""
Módulo de agentes
Proporciona los agentes de deep RL, las políticas de referencia y el registro
por tipo de agente
"""

from typing import Optional

from models.agent_models import AGENT_CONFIGS, AgentConfig, AgentKind

from .base import BaseAgent, net_seed

from .replay import (
    Batch,
    StepRecord,
    ReplayBuffer,
    SumTree,
    PrioritizedBuffer,
    per_sample,
    nstep_aggregate,
    NStepAccumulator
)

from .rollout import (
    RolloutBatch,
    RolloutCollector,
    compute_advantages
)

from .ppo import PpoAgent, clipped_surrogate, ppo_loss
from .trpo import TrpoAgent, conjugate_gradient, trpo_update
from .sac import SacAgent, SacNets, soft_value_target, policy_loss_terms
from .rainbow import RainbowAgent, RainbowNet, Support, categorical_project, dueling_q_logits, q_values

from .scripted import ConstantPolicy, HeuristicPolicy, MyopicPolicy, geometry_from_observation

AGENT_CLASSES: dict[AgentKind, type[BaseAgent]] = {
    AgentKind.PPO: PpoAgent,
    AgentKind.TRPO: TrpoAgent,
    AgentKind.SAC: SacAgent,
    AgentKind.RAINBOW: RainbowAgent,
}


def create_agent(
    kind: AgentKind | str,
    config: Optional[AgentConfig] = None,
    seed: int = 0,
    reward_range: tuple[float, float] = (-0.6, 1.0),
) -> BaseAgent:
    """
    Instancia un agente por tipo.
    
    Args:
        kind: ppo | trpo | sac | rainbow
        config: Hiperparámetros (por defecto los del tipo)
        seed: Semilla del agente
        reward_range: Cotas de recompensa del entorno (soporte automático de Rainbow)
    """
    kind = AgentKind(kind)
    config = config if config is not None else AGENT_CONFIGS[kind]()
    if kind is AgentKind.RAINBOW:
        return RainbowAgent(config, seed, reward_range)
    return AGENT_CLASSES[kind](config, seed)


__all__ = [
    # Registro
    "AGENT_CLASSES",
    "create_agent",
    "BaseAgent",
    "net_seed",

    # Memorias
    "Batch",
    "StepRecord",
    "ReplayBuffer",
    "SumTree",
    "PrioritizedBuffer",
    "per_sample",
    "nstep_aggregate",
    "NStepAccumulator",

    # On-policy
    "RolloutBatch",
    "RolloutCollector",
    "compute_advantages",
    "PpoAgent",
    "clipped_surrogate",
    "ppo_loss",
    "TrpoAgent",
    "conjugate_gradient",
    "trpo_update",

    # Off-policy
    "SacAgent",
    "SacNets",
    "soft_value_target",
    "policy_loss_terms",
    "RainbowAgent",
    "RainbowNet",
    "Support",
    "categorical_project",
    "dueling_q_logits",
    "q_values",

    # Referencias
    "ConstantPolicy",
    "HeuristicPolicy",
    "MyopicPolicy",
    "geometry_from_observation",
]
