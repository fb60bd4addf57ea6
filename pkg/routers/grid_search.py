import argparse
import logging

from models.agent_models import AgentKind
from routers.common import EXIT_FAILURE, EXIT_OK, add_common_flags, handle_errors, resolve
from services.grid_service import grid_search

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("grid-search", help="Grid search de hiperparámetros de un agente")
    add_common_flags(parser)
    parser.add_argument("--agent", choices=[k.value for k in AgentKind], default=None, help="Agente (por defecto 'agent' de la configuración)")
    parser.add_argument("--episodes", type=int, default=None, help="Episodios por ejecución (por defecto 'episodes')")
    parser.add_argument("--workers", type=int, default=None, help="Procesos en paralelo (por defecto HANDOVER_WORKERS)")
    parser.set_defaults(handler=handle)


@handle_errors
def handle(args: argparse.Namespace) -> int:
    """Escribe grid_ranking.csv y best_models.json; con --seed entrena sólo esa semilla"""
    config, out_dir, _ = resolve(args, episodes=args.episodes, seed=args.seed, agent=args.agent)
    ranking = grid_search(config.agent, config, out_dir=out_dir, workers=args.workers)
    if all(cell.score is None for cell in ranking):
        logger.error("❌ Todas las celdas fallaron")
        return EXIT_FAILURE
    return EXIT_OK
