"""
Servicio de robustez
Evalúa los modelos 1.º y 2.º de la grid search en el escenario de prueba y
compara su fiabilidad con la del escenario de entrenamiento.
"""

import logging
from pathlib import Path
from typing import Optional

from config.run_config import RunConfig
from models.harness_models import RobustnessRow
from services.checkpoint_service import load_agent
from services.training_service import evaluate_policy
from utils.errors import CheckpointError
from utils.io_utils import write_json

logger = logging.getLogger(__name__)

MODEL_RANKS = ("1st", "2nd")


def robustness_eval(
    checkpoints: dict[str, dict[str, Optional[str]]],
    run_cfg: RunConfig,
    train_scenario: int = 1,
    test_scenario: int = 2,
    episodes: Optional[int] = None,
    out_dir: Optional[str | Path] = None,
) -> list[RobustnessRow]:
    """
    Tabla de robustez: dos filas (1st, 2nd) por agente.
    
    Args:
        checkpoints: {agente: {"1st": ruta, "2nd": ruta}}
        run_cfg: Configuración de los entornos de evaluación
        episodes: Episodios voraces por escenario (por defecto los de evaluación)
    
    Returns:
        list[RobustnessRow]: Checkpoints ausentes o ilegibles aparecen con status "absent"
    """
    rows = []
    for agent_name in sorted(checkpoints):
        for rank in MODEL_RANKS:
            path = checkpoints[agent_name].get(rank)
            row = RobustnessRow(agent=agent_name, model=rank, checkpoint=path, status="absent")
            if path is None or not Path(path).is_file():
                logger.warning(f"Checkpoint ausente para {agent_name} ({rank}): {path}")
                rows.append(row)
                continue
            try:
                agent, _ = load_agent(path)
            except CheckpointError as e:
                logger.warning(f"Checkpoint ilegible para {agent_name} ({rank}): {e}")
                rows.append(row)
                continue
            _, train_metrics = evaluate_policy(agent, run_cfg, train_scenario, episodes=episodes)
            _, test_metrics = evaluate_policy(agent, run_cfg, test_scenario, episodes=episodes)
            rows.append(row.model_copy(update={
                "status": "ok",
                "reliability_train": train_metrics.reliability,
                "reliability_test": test_metrics.reliability,
                "gap": train_metrics.reliability - test_metrics.reliability,
            }))
            logger.info(
                f"✅ {agent_name} ({rank}): escenario {train_scenario} {train_metrics.reliability:.2f} % → "
                f"escenario {test_scenario} {test_metrics.reliability:.2f} %"
            )
    if out_dir is not None:
        write_json(rows, Path(out_dir) / "robustness.json")
    return rows
