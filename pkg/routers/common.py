"""
Utilidades compartidas por los subcomandos: opciones comunes, resolución de
la configuración y de la política a evaluar, y conversión de errores.
"""

import argparse
import functools
import logging
from pathlib import Path
from typing import Callable

from config.run_config import RunConfig, echo_config, load_config
from config.settings import settings
from models.env_models import Action
from services.agents import ConstantPolicy, HeuristicPolicy, MyopicPolicy
from services.checkpoint_service import load_agent
from utils.errors import CheckpointError, ConfigurationError, ContractViolation, TrainingDivergedError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SCRIPTED_POLICIES = ("always-a1", "always-a2", "always-a3", "always-a8", "heuristic", "myopic")


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="Archivo de configuración JSON (vacío u omitido: valores por defecto)")
    parser.add_argument("--seed", type=int, default=None, help="Semilla (por defecto la primera de 'seeds' en la configuración)")
    parser.add_argument("--out", type=Path, default=None, help=f"Directorio de salida (por defecto output_dir de la configuración o {settings.HANDOVER_OUTPUT_DIR})")


def add_policy_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint", type=Path, help="Checkpoint de un agente entrenado")
    group.add_argument("--policy", choices=SCRIPTED_POLICIES, help="Política de referencia sin aprendizaje")


def resolve(args: argparse.Namespace, **overrides) -> tuple[RunConfig, Path, int]:
    """
    Configuración validada con las opciones del subcomando incorporadas
    (ver RunConfig.with_overrides), directorio de salida (con config.json)
    y semilla.
    """
    config = load_config(args.config).with_overrides(**overrides)
    out_dir = args.out or Path(config.output_dir or settings.HANDOVER_OUTPUT_DIR)
    seed = args.seed if args.seed is not None else config.seeds[0]
    echo_config(config, out_dir)
    return config, out_dir, seed


def build_policy(args: argparse.Namespace, config: RunConfig):
    """Agente restaurado desde --checkpoint o política de --policy"""
    if args.checkpoint is not None:
        agent, _ = load_agent(args.checkpoint)
        return agent
    if args.policy.startswith("always-a"):
        return ConstantPolicy(Action(int(args.policy[-1])))
    if args.policy == "heuristic":
        return HeuristicPolicy(config.channels, config.environment.max_range)
    return MyopicPolicy(config.channels, config.costs, config.environment.max_range)


def handle_errors(handler: Callable[[argparse.Namespace], int]) -> Callable[[argparse.Namespace], int]:
    """Convierte las excepciones de los servicios en un código de salida"""

    @functools.wraps(handler)
    def wrapper(args: argparse.Namespace) -> int:
        try:
            return handler(args)
        except (ConfigurationError, ContractViolation) as e:
            logger.error(f"❌ {e}")
            return EXIT_USAGE
        except (CheckpointError, TrainingDivergedError, OSError) as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            return EXIT_FAILURE

    return wrapper
