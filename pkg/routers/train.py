import argparse
import logging

from models.agent_models import AgentKind
from routers.common import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, add_common_flags, handle_errors, resolve
from services.grid_service import train_seeds
from services.metrics_service import mean_metrics, sample_complexity
from services.training_service import train_run
from utils.io_utils import write_json

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Entrena un agente en el escenario configurado")
    add_common_flags(parser)
    parser.add_argument("--agent", choices=[k.value for k in AgentKind], default=None, help="Agente (por defecto 'agent' de la configuración)")
    parser.add_argument("--episodes", type=int, default=None, help="Presupuesto de episodios (por defecto 'episodes')")
    parser.add_argument("--all-seeds", action="store_true", help="Entrena todas las semillas de la configuración y agrega las curvas")
    parser.add_argument("--resume", default=None, help="Checkpoint desde el que reanudar (una sola semilla)")
    parser.add_argument("--workers", type=int, default=None, help="Procesos para --all-seeds (por defecto HANDOVER_WORKERS)")
    parser.set_defaults(handler=handle)


@handle_errors
def handle(args: argparse.Namespace) -> int:
    """Escribe curve.csv, metrics.json, trace.csv, checkpoints y complexity.json en --out"""
    if args.episodes is not None and args.episodes < 1:
        logger.error("--episodes debe ser >= 1")
        return EXIT_USAGE
    seed_override = None if args.all_seeds else args.seed
    config, out_dir, seed = resolve(args, episodes=args.episodes, seed=seed_override, agent=args.agent)
    kind = config.agent

    if not args.all_seeds:
        artifacts = train_run(kind, config, seed, out_dir=out_dir, resume_from=args.resume)
        return EXIT_FAILURE if artifacts.failed else EXIT_OK

    runs, curve = train_seeds(kind, config, out_dir=out_dir, workers=args.workers)
    ok = [r for r in runs if not r.failed]
    if ok:
        write_json(mean_metrics([r.metrics for r in ok]), out_dir / "metrics.json")
    if curve is not None:
        write_json(sample_complexity(curve.mean, kind.value), out_dir / "sample_complexity.json")
    logger.info(f"✅ {len(ok)}/{len(runs)} semillas completadas")
    return EXIT_OK if ok else EXIT_FAILURE
