"""
Servicio de entrenamiento
Bucle de entrenamiento de un agente con una semilla, checkpoints del mejor
episodio y final, reanudación exacta y evaluación voraz.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from config.run_config import RunConfig, echo_config
from models.agent_models import AgentConfig, AgentKind
from models.env_models import Action, Trace
from models.harness_models import Metrics, RunArtifacts
from services.agents import BaseAgent, create_agent
from services.checkpoint_service import load_agent, save_agent
from services.env_service import HandoverEnv, reward_bounds, run_policy_episode
from services.metrics_service import compute_metrics, mean_metrics
from utils.errors import ContractViolation, TrainingDivergedError
from utils.io_utils import CURVE_COLUMNS, write_csv, write_json
from utils.rng import derive_seed

logger = logging.getLogger(__name__)

BEST_CHECKPOINT = "best.ckpt"
FINAL_CHECKPOINT = "final.ckpt"


def episode_seed(seed: int, episode: int) -> int:
    """Semilla del entorno para el episodio de entrenamiento `episode`"""
    return derive_seed(seed, episode)


def run_training_episode(env: HandoverEnv, agent: BaseAgent, scenario_id: int, seed: int) -> float:
    """Un episodio completo de recolección/actualización; devuelve el retorno"""
    obs = env.reset(scenario_id, seed).to_array()
    episode_return = 0.0
    while not env.done:
        action = agent.select_action(obs)
        transition = env.step(Action.from_index(action))
        next_obs = transition.next_obs.to_array()
        agent.observe(obs, action, transition.reward, next_obs, transition.done)
        episode_return += transition.reward
        obs = next_obs
    agent.end_episode()
    return episode_return


def evaluate_policy(policy, run_cfg: RunConfig, scenario_id: Optional[int] = None, seed: Optional[int] = None, episodes: Optional[int] = None) -> tuple[list[Trace], Metrics]:
    """
    Evaluación voraz: episodios con semillas seed, seed+1, ...
    
    Returns:
        tuple: (trazas, métricas promediadas)
    """
    env = HandoverEnv(run_cfg)
    scenario_id = run_cfg.scenario if scenario_id is None else scenario_id
    seed = run_cfg.evaluation.seed if seed is None else seed
    episodes = run_cfg.evaluation.episodes if episodes is None else episodes
    traces = [run_policy_episode(env, policy, scenario_id, seed + k) for k in range(episodes)]
    return traces, mean_metrics([compute_metrics(t) for t in traces])


def diagnostics_frame(agent: BaseAgent) -> pd.DataFrame:
    return pd.DataFrame(agent.diagnostics)


def train_run(
    kind: AgentKind | str,
    run_cfg: RunConfig,
    seed: int,
    episodes: Optional[int] = None,
    agent_cfg: Optional[AgentConfig] = None,
    out_dir: Optional[str | Path] = None,
    resume_from: Optional[str | Path] = None,
    scenario_id: Optional[int] = None,
    evaluate: bool = True,
) -> RunArtifacts:
    """
    Entrena un agente durante `episodes` episodios.
    
    Args:
        kind: Tipo de agente
        run_cfg: Configuración de la ejecución
        seed: Semilla del agente y de los episodios
        episodes: Presupuesto total de episodios (por defecto run_cfg.episodes)
        agent_cfg: Hiperparámetros (por defecto la sección del agente en run_cfg)
        out_dir: Directorio de artefactos (None → sin escritura)
        resume_from: Checkpoint desde el que continuar; el resultado coincide con
            el de una ejecución ininterrumpida con la misma semilla
        scenario_id: Escenario de entrenamiento (por defecto run_cfg.scenario)
        evaluate: Ejecutar la evaluación voraz final
    
    Returns:
        RunArtifacts: Curva, checkpoints y métricas; failed=True si la pérdida diverge
    """
    kind = AgentKind(kind)
    episodes = run_cfg.episodes if episodes is None else episodes
    scenario_id = run_cfg.scenario if scenario_id is None else scenario_id
    out_dir = Path(out_dir) if out_dir is not None else None
    env = HandoverEnv(run_cfg)

    returns: list[float] = []
    best_return = float("-inf")
    if resume_from is not None:
        agent, harness = load_agent(resume_from)
        if agent.kind is not kind or agent.seed != int(seed):
            raise ContractViolation(f"El checkpoint es de {agent.kind.value}/semilla {agent.seed}, no de {kind.value}/{seed}")
        returns = list(harness.get("returns", []))
        best_return = float(harness.get("best_return", best_return))
        logger.info(f"Reanudando {kind.value} semilla {seed} desde el episodio {len(returns)}")
    else:
        agent_cfg = agent_cfg if agent_cfg is not None else run_cfg.agent_config(kind)
        agent = create_agent(kind, agent_cfg, seed, reward_bounds(run_cfg.costs))

    if out_dir is not None:
        echoed = run_cfg.with_overrides(scenario=scenario_id, episodes=episodes, seed=seed)
        echo_config(echoed.with_agent_params(kind, agent.config.model_dump()), out_dir)

    artifacts = RunArtifacts(agent=kind.value, seed=int(seed), episodes=episodes, returns=returns)
    logger.info(f"🚀 Entrenando {kind.value} (semilla {seed}, {episodes} episodios, escenario {scenario_id})")
    try:
        for episode in range(len(returns), episodes):
            episode_return = run_training_episode(env, agent, scenario_id, episode_seed(seed, episode))
            returns.append(episode_return)
            if out_dir is not None and episode_return > best_return:
                best_return = episode_return
                artifacts.best_checkpoint = str(save_agent(agent, out_dir / BEST_CHECKPOINT, _harness_state(returns, best_return)))
            best_return = max(best_return, episode_return)
            logger.debug(f"[{kind.value}/{seed}] episodio {episode + 1}/{episodes}: retorno {episode_return:.2f}")
    except TrainingDivergedError as e:
        logger.warning(f"❌ {kind.value} semilla {seed} divergió en el episodio {len(returns) + 1}: {e}")
        artifacts.failed = True
        artifacts.failure = str(e)
        artifacts.diagnostics = {**e.diagnostics, "episode": len(returns) + 1}

    artifacts.returns = returns
    if out_dir is not None:
        best = out_dir / BEST_CHECKPOINT
        artifacts.best_checkpoint = str(best) if best.exists() else None
        write_csv(({"episode": i + 1, "return": r} for i, r in enumerate(returns)), out_dir / "curve.csv", CURVE_COLUMNS)
        write_csv(diagnostics_frame(agent), out_dir / "diagnostics.csv")
        write_json(agent.parameter_counts(), out_dir / "complexity.json")
        if not artifacts.failed:
            artifacts.final_checkpoint = str(save_agent(agent, out_dir / FINAL_CHECKPOINT, _harness_state(returns, best_return)))

    if evaluate and not artifacts.failed:
        traces, metrics = evaluate_policy(agent, run_cfg, scenario_id)
        artifacts.metrics = metrics
        if out_dir is not None:
            write_json(metrics, out_dir / "metrics.json")
            write_csv(traces[0].to_frame(), out_dir / "trace.csv")
    if out_dir is not None:
        write_json(artifacts, out_dir / "run.json")

    status = "❌ fallida" if artifacts.failed else "✅ completada"
    logger.info(f"{status}: {kind.value} semilla {seed}, retorno final {returns[-1] if returns else float('nan'):.2f}")
    return artifacts


def _harness_state(returns: Sequence[float], best_return: float) -> dict:
    return {"returns": list(returns), "best_return": best_return, "episode": len(returns)}
